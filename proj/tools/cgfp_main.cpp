// cgfp: experiment driver for instrumented CG runs and their Lanczos-side
// diagnostics, convergence bounds, exact-arithmetic emulation, and the
// equivalent-matrix extension.
#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "cgfp/cgfp.hpp"

namespace fs = std::filesystem;
using namespace cgfp;
using nlohmann::json;

namespace {

struct Stage {
  std::string name;
  double seconds;
};

struct Emitter {
  fs::path dir;
  std::string digest;
  json files = json::array();
  std::vector<Stage> stages;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void stage(const std::string& name) {
    auto now = std::chrono::steady_clock::now();
    stages.push_back({name, std::chrono::duration<double>(now - t0).count()});
    t0 = now;
  }

  void emit(const std::string& name, const std::string& body) {
    fs::path p = dir / name;
    write_file(p.string(), body);
    files.push_back({{"file", name}, {"fnv1a64", hex64(fnv1a(body))}, {"bytes", body.size()}});
  }

  void finish(int exit_code) {
    json m;
    m["config_digest"] = digest;
    m["version"] = "cgfp 0.1.0";
    m["exit_code"] = exit_code;
    m["files"] = files;
    json st = json::array();
    for (const auto& s : stages) st.push_back({{"stage", s.name}, {"seconds", s.seconds}});
    m["stages"] = st;
    write_file((dir / "run-manifest.json").string(), m.dump(2) + "\n");
  }
};

struct ModelParams {
  std::size_t n = 48;
  double rho = 0.8;
  double lambda1 = 0.001;
  double lambdan = 1.0;
};

ModelParams parse_model(const std::vector<std::string>& kvs) {
  ModelParams m;
  for (const auto& tok_in : kvs) {
    std::string tok = tok_in;
    std::replace(tok.begin(), tok.end(), ',', ' ');
    std::istringstream is(tok);
    std::string kv;
    while (is >> kv) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) fail(Errc::InvalidInput, "--model expects key=value, got '" + kv + "'");
      std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
      if (key == "n") m.n = std::stoul(val);
      else if (key == "rho") m.rho = std::stod(val);
      else if (key == "lambda1") m.lambda1 = std::stod(val);
      else if (key == "lambdan") m.lambdan = std::stod(val);
      else fail(Errc::InvalidInput, "unknown model key '" + key + "'");
    }
  }
  return m;
}

SpdMatrix load_mtx(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path);
  return parse_matrix_market(in);
}

std::vector<double> load_spectrum_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path);
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  std::sort(v.begin(), v.end());
  if (v.empty()) fail(Errc::InvalidInput, "no values in " + path);
  return v;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string out_dir_default() {
  const char* env = std::getenv("CGFP_OUT_DIR");
  return env ? env : ".";
}

// Shared problem-source options.
struct ProblemOpts {
  std::vector<std::string> model_kvs;
  std::string mtx_path;
  std::string prescale = "none";
  bool normalize = false;
  std::uint64_t seed = 1;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--model", model_kvs, "model problem key=value list (n rho lambda1 lambdan)")
        ->expected(-1);
    cmd->add_option("--mtx", mtx_path, "Matrix Market file");
    cmd->add_option("--prescale", prescale, "none|diagonal")->check(CLI::IsMember({"none", "diagonal"}));
    cmd->add_flag("--normalize", normalize, "scale the matrix to unit spectral norm");
    cmd->add_option("--seed", seed, "PRNG seed for problem construction");
  }

  bool is_model() const { return mtx_path.empty(); }

  Problem build() const {
    if (is_model()) {
      ModelParams m = parse_model(model_kvs);
      return model_problem(m.n, m.rho, m.lambda1, m.lambdan, seed);
    }
    SpdMatrix A = load_mtx(mtx_path);
    if (prescale == "diagonal") A = diagonal_prescale(A);
    if (normalize) A = normalize_to_unit_norm(A);
    return problem_with_random_solution(std::move(A), seed, fs::path(mtx_path).filename().string());
  }

  json describe() const {
    json j;
    if (is_model()) {
      ModelParams m = parse_model(model_kvs);
      j["model"] = {{"n", m.n}, {"rho", m.rho}, {"lambda1", m.lambda1}, {"lambdan", m.lambdan}};
    } else {
      j["mtx"] = mtx_path;
      j["prescale"] = prescale;
      j["normalize"] = normalize;
    }
    j["seed"] = seed;
    return j;
  }
};

int cmd_run(const ProblemOpts& popts, const std::vector<std::string>& variants, std::size_t max_iter,
            bool replacement, double rep_threshold, bool bundle, int meas_digits, Emitter& em) {
  Problem p = popts.build();
  em.stage("problem");
  bool partial = false;
  for (const std::string& vname : variants) {
    Variant v = variant_from_name(vname);
    SolveOptions opts;
    opts.max_iter = max_iter;
    opts.residual_replacement = replacement;
    if (rep_threshold > 0) opts.replacement_threshold = rep_threshold;
    CGTrace<double> tr = run_cg(p, v, opts);
    if (tr.stop == StopReason::Breakdown || tr.stop == StopReason::NotPositiveDefinite) {
      partial = true;
      std::cerr << "warning: " << vname << " stopped early: " << tr.stop_detail << "\n";
    }
    if (tr.iterations() == 0) continue;
    ErrorHistory hist = error_history(tr, p);
    Tridiagonal<double> T = build_tridiagonal(tr);
    LanczosDiagnostics diag = lanczos_residual(p, tr, T, meas_digits);
    Definiteness def = definiteness(T);
    em.emit("trace_" + vname + ".csv", trace_csv(tr, hist, em.digest));
    json summary = diagnostics_json(diag, def, hist.plateau_index);
    summary["variant"] = vname;
    summary["iterations"] = tr.iterations();
    summary["stop"] = stop_reason_name(tr.stop);
    summary["replacements"] = tr.replacement_steps.size();
    summary["negative_coeff_steps"] = tr.negative_coeff_steps.size();
    if (v != Variant::HSCG) {
      AuxiliaryDeviation aux = auxiliary_deviation(p.A, tr, meas_digits);
      auto maxof = [](const std::vector<double>& v2) {
        double m = 0;
        for (double x : v2) m = std::max(m, x);
        return m;
      };
      summary["max_s_deviation"] = maxof(aux.s_dev);
      if (v == Variant::GVCG) {
        summary["max_w_deviation"] = maxof(aux.w_dev);
        summary["max_u_deviation"] = maxof(aux.u_dev);
      }
    }
    em.emit("summary_" + vname + ".json", summary.dump(2) + "\n");
    if (bundle) {
      json b;
      b["problem"] = popts.describe();
      b["trace"] = trace_json(tr, true);
      em.emit("bundle_" + vname + ".json", b.dump() + "\n");
    }
    em.stage(vname);
  }
  return partial ? 2 : 0;
}

int cmd_bounds(const ProblemOpts& popts, const std::string& spectrum_file,
               const std::string& intervals_arg, const std::vector<double>& deltas,
               std::size_t kmax, int digits, Emitter& em) {
  std::vector<double> spectrum;
  if (!intervals_arg.empty()) {
    ;  // explicit interval list handled below
  } else if (!spectrum_file.empty()) {
    spectrum = load_spectrum_file(spectrum_file);
  } else if (!popts.is_model()) {
    Problem p = popts.build();
    spectrum = p.A.spectral().eigenvalues;
  } else {
    ModelParams m = parse_model(popts.model_kvs);
    spectrum = model_spectrum(m.n, m.rho, m.lambda1, m.lambdan);
  }
  PrecisionContext ctx(std::max(32, digits));

  int rc = 0;
  if (!spectrum.empty()) {
    double kappa = spectrum.back() / spectrum.front();
    std::vector<std::pair<std::size_t, std::string>> cheb, chebr, mms;
    for (std::size_t k = 0; k <= kmax; ++k) {
      cheb.emplace_back(k, fmt(chebyshev_bound(kappa, k, BoundFlavor::Anorm)));
      chebr.emplace_back(k, fmt(chebyshev_bound(kappa, k, BoundFlavor::Rnorm)));
      mms.emplace_back(k, fmt(mms_bound(kappa, k)));
    }
    std::string params = "kappa=" + fmt(kappa);
    em.emit("chebyshev_anorm.csv", bounds_csv(cheb, "chebyshev-anorm", params, em.digest));
    em.emit("chebyshev_rnorm.csv", bounds_csv(chebr, "chebyshev-rnorm", params, em.digest));
    em.emit("mms.csv", bounds_csv(mms, "mms", params, em.digest));
    em.stage("chebyshev");
  }

  auto emit_minimax = [&](const IntervalUnion& U, const std::string& label) {
    auto series = minimax_series(U, kmax, ctx);
    std::vector<std::pair<std::size_t, std::string>> rows;
    for (std::size_t k = 0; k <= kmax; ++k) {
      std::string v = series[k].value.str(20);
      if (!series[k].converged) {
        v += " (not-levelled)";
        rc = 2;
      }
      rows.emplace_back(k, v);
    }
    em.emit("minimax_" + label + ".csv", bounds_csv(rows, "minimax", label, em.digest));
    em.stage("minimax_" + label);
  };

  if (!intervals_arg.empty()) {
    std::vector<std::pair<double, double>> pairs;
    for (const std::string& tok : split_csv(intervals_arg)) {
      auto colon = tok.find(':');
      if (colon == std::string::npos) fail(Errc::InvalidInput, "--intervals expects lo:hi pairs");
      pairs.emplace_back(std::stod(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
    }
    emit_minimax(IntervalUnion::from_pairs(pairs), "explicit");
  } else {
    for (double d : deltas) emit_minimax(IntervalUnion::from_spectrum(spectrum, d), "delta_" + fmt(d));
  }
  return rc;
}

int cmd_spread_exact(const ProblemOpts& popts, const std::string& spectrum_file, int multiplicity,
                     const std::vector<double>& widths, bool width_is_half, int digits,
                     std::size_t max_iter, double stop_tol, Emitter& em) {
  std::vector<double> spectrum;
  if (!spectrum_file.empty())
    spectrum = load_spectrum_file(spectrum_file);
  else if (!popts.is_model())
    spectrum = popts.build().A.spectral().eigenvalues;
  else {
    ModelParams m = parse_model(popts.model_kvs);
    spectrum = model_spectrum(m.n, m.rho, m.lambda1, m.lambdan);
  }
  PrecisionContext ctx(digits);
  for (double w : widths) {
    SpectrumSpec spec;
    spec.values = spectrum;
    spec.multiplicity = multiplicity;
    spec.width = w;
    spec.width_is_half = width_is_half;
    SpdMatrix Ahat = interval_spread(spec);
    std::size_t n = Ahat.dim();
    // the same seeded solution vector is used for every width
    Problem p = problem_with_random_solution(std::move(Ahat), popts.seed, "spread w=" + fmt(w));
    ExactCgOptions o;
    o.record_vectors = false;
    o.stop_tol = stop_tol;
    std::size_t iters = max_iter ? max_iter : n;
    ExactCgResult r = exact_cg(p, iters, ctx, o);
    std::ostringstream os;
    os << "# config=" << em.digest << "\n";
    os << "k,err_anorm_rel\n";
    for (std::size_t k = 0; k < r.err_anorm_rel.size(); ++k)
      os << k << "," << r.err_anorm_rel[k].str(20) << "\n";
    em.emit("exact_width_" + fmt(w) + ".csv", os.str());
    em.stage("width_" + fmt(w));
  }
  return 0;
}

int cmd_extend(const std::string& bundle_path, const ProblemOpts& popts, const std::string& variant,
               std::size_t max_iter, std::size_t J, int digits, double cluster_width, double conv_tol,
               double half_width, Emitter& em) {
  Problem p;
  CGTrace<double> tr;
  if (!bundle_path.empty()) {
    std::ifstream in(bundle_path);
    if (!in) fail(Errc::IoError, "cannot open " + bundle_path);
    json b = json::parse(in);
    const json& pj = b.at("problem");
    if (pj.contains("model")) {
      const json& mj = pj.at("model");
      p = model_problem(mj.at("n").get<std::size_t>(), mj.at("rho").get<double>(),
                        mj.at("lambda1").get<double>(), mj.at("lambdan").get<double>(),
                        pj.at("seed").get<std::uint64_t>());
    } else {
      SpdMatrix A = load_mtx(pj.at("mtx").get<std::string>());
      if (pj.value("prescale", "none") == std::string("diagonal")) A = diagonal_prescale(A);
      if (pj.value("normalize", false)) A = normalize_to_unit_norm(A);
      p = problem_with_random_solution(std::move(A), pj.at("seed").get<std::uint64_t>());
    }
    tr = trace_from_json(b.at("trace"));
  } else {
    p = popts.build();
    SolveOptions opts;
    opts.max_iter = max_iter;
    tr = run_cg(p, variant_from_name(variant), opts);
  }
  em.stage("trace");
  if (J == 0) J = std::min<std::size_t>(100, tr.iterations());
  Tridiagonal<double> T = build_tridiagonal(tr, J);
  Definiteness def = definiteness(T);
  if (!def.positive_definite)
    fail(Errc::NotPositiveDefinite,
         "T_J is indefinite (min eig " + fmt(def.min_eig) + "); none of the analysis applies");

  PrecisionContext ctx(digits);
  LanczosBasis basis = promote_basis(tr, J, ctx.bits());
  RitzClassification cls = classify_ritz(p.A, T, basis, cluster_width, conv_tol, ctx);
  std::cout << "classification: m=" << cls.m << " of J=" << J << "\n"
            << "  Y_hat orthonormality defect: " << fmt(cls.ortho_defect) << "\n"
            << "  max |<q_{J+1}, y>|:          " << fmt(cls.max_q_next_inner) << "\n"
            << "  q_J residual off span(Y_hat): " << fmt(cls.qJ_residual) << "\n";
  em.stage("classify");

  ExtendResult ext = extend_T(p.A, T, basis, cls, ctx);
  std::cout << "extension: size " << ext.T_ext.size() << " (J+n-m = " << (J + p.A.dim() - cls.m)
            << ")\n"
            << "  max eigenvalue distance to spectrum(A): " << fmt(ext.max_eig_distance) << "\n"
            << "  min eigenvalue: " << fmt(ext.min_eig) << "  kappa(T): " << fmt(ext.kappa_T) << "\n"
            << "  relation residual: " << fmt(ext.relation_residual)
            << "  orthogonality defect: " << fmt(ext.orthogonality_defect) << "\n";
  em.stage("extend");

  const std::vector<double>& spectrum = p.A.spectral().eigenvalues;
  em.emit("T_ext.txt", tridiagonal_text(ext.T_ext, digits));
  em.emit("eig_distance.csv", eig_distance_csv(ext, spectrum, em.digest));
  double floor_v = extension_floor(T, spectrum);
  MatchReport rep = verify_extension(p.A, ext, tr, ctx);
  em.emit("match_report.csv", match_report_csv(rep, em.digest));
  em.stage("verify");

  HistogramReport hj = ritz_histogram(T, spectrum, half_width);
  std::vector<double> ext_eigs;
  for (const auto& e : ext.eigenvalues) ext_eigs.push_back(e.to_double());
  HistogramReport he = ritz_histogram_values(ext_eigs, spectrum, half_width);
  em.emit("histogram_TJ.csv", histogram_csv(hj, em.digest));
  em.emit("histogram_Text.csv", histogram_csv(he, em.digest));

  json summary;
  summary["J"] = J;
  summary["m"] = cls.m;
  summary["T_ext_size"] = ext.T_ext.size();
  summary["max_eig_distance"] = ext.max_eig_distance;
  summary["min_eig"] = ext.min_eig;
  summary["kappa_T"] = ext.kappa_T;
  summary["relation_residual"] = ext.relation_residual;
  summary["orthogonality_defect"] = ext.orthogonality_defect;
  summary["extension_floor"] = floor_v;
  summary["r0hat_max_rel_discrepancy"] = rep.r0hat_max_rel_discrepancy;
  summary["health"] = {{"ortho_defect", cls.ortho_defect},
                       {"max_q_next_inner", cls.max_q_next_inner},
                       {"qJ_residual", cls.qJ_residual}};
  double rmin = 1e300, rmax = 0.0;
  for (double r : rep.ratio) {
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  summary["match_ratio_min"] = rmin;
  summary["match_ratio_max"] = rmax;
  em.emit("extend_summary.json", summary.dump(2) + "\n");
  em.stage("reports");
  return 0;
}

int cmd_report(const std::string& dir) {
  fs::path d(dir);
  std::ifstream in(d / "run-manifest.json");
  if (!in) fail(Errc::IoError, "no run-manifest.json in " + dir);
  json m = json::parse(in);
  std::cout << "manifest " << (d / "run-manifest.json").string() << "\n";
  std::cout << "  config digest: " << m.value("config_digest", "?") << "\n";
  for (const auto& f : m.value("files", json::array()))
    std::cout << "  " << f.value("file", "?") << "  fnv1a64=" << f.value("fnv1a64", "?") << "  ("
              << f.value("bytes", 0) << " bytes)\n";
  for (const auto& entry : fs::directory_iterator(d)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("summary_", 0) == 0 || name == "extend_summary.json") {
      std::ifstream sin(entry.path());
      json s = json::parse(sin);
      std::cout << name << ": " << s.dump() << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-precision CG variants: instrumented runs, Lanczos diagnostics, convergence "
               "bounds, and equivalent-matrix extensions"};
  app.require_subcommand(1);
  app.set_config("--config")->configurable(false);

  std::string out_dir = out_dir_default();
  app.add_option("--out", out_dir, "output directory (env CGFP_OUT_DIR)")->configurable(true);

  // run
  auto* run = app.add_subcommand("run", "instrumented solves with per-variant diagnostics");
  ProblemOpts run_p;
  run_p.add_to(run);
  std::string variants_arg = "hscg,cgcg,gvcg";
  std::size_t max_iter = 100;
  bool replacement = false;
  double rep_threshold = 0.0;
  bool bundle = false;
  int meas_digits = 32;
  run->add_option("--variants", variants_arg, "comma list of hscg,cgcg,gvcg");
  run->add_option("--max-iter", max_iter, "iteration cap");
  run->add_flag("--residual-replacement", replacement, "replace r_k by b - A x_k on drift");
  run->add_option("--replacement-threshold", rep_threshold, "drift trigger (default sqrt(u))");
  run->add_flag("--bundle", bundle, "also write full trace bundles (vectors included)");
  run->add_option("--meas-digits", meas_digits, "measurement precision for diagnostics");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Chebyshev/MMS/minimax bound series");
  ProblemOpts bounds_p;
  bounds_p.add_to(bounds);
  std::string spectrum_file, intervals_arg;
  std::vector<double> deltas{1e-14, 1e-7};
  std::size_t kmax = 110;
  int digits = 64;
  bounds->add_option("--spectrum", spectrum_file, "file with one eigenvalue per line");
  bounds->add_option("--intervals", intervals_arg, "explicit union, lo:hi,lo:hi,...");
  bounds->add_option("--delta", deltas, "interval half-widths about each eigenvalue")->expected(-1);
  bounds->add_option("--kmax", kmax, "largest polynomial degree");
  bounds->add_option("--digits", digits, "context precision for the minimax computation");

  // spread-exact
  auto* spread = app.add_subcommand("spread-exact", "exact CG on the interval-spread matrix");
  ProblemOpts spread_p;
  spread_p.add_to(spread);
  std::string spread_spectrum;
  int multiplicity = 11;
  std::vector<double> widths{1e-14, 1e-7};
  bool width_is_half = false;
  int spread_digits = 32;
  std::size_t spread_max_iter = 0;
  double stop_tol = 0.0;
  spread->add_option("--spectrum", spread_spectrum, "file with one eigenvalue per line");
  spread->add_option("--multiplicity", multiplicity, "eigenvalues per interval");
  spread->add_option("--widths", widths, "full interval widths")->expected(-1);
  spread->add_flag("--half-width-convention", width_is_half, "treat widths as half-widths");
  spread->add_option("--digits", spread_digits, "context precision (>= 32)");
  spread->add_option("--max-iter", spread_max_iter, "iteration cap (default: dimension)");
  spread->add_option("--stop-tol", stop_tol, "stop once the relative error falls below this");

  // extend
  auto* extend = app.add_subcommand("extend", "extend T_J to an equivalent exact-arithmetic matrix");
  ProblemOpts ext_p;
  ext_p.add_to(extend);
  std::string bundle_path, ext_variant = "hscg";
  std::size_t ext_max_iter = 100, Jopt = 0;
  int ext_digits = 64;
  double cluster_width = 1.4901161193847656e-08;
  double conv_tol = 1.4901161193847656e-08;
  double half_width = 1e-8;
  extend->add_option("--trace", bundle_path, "trace bundle JSON from `run --bundle`");
  extend->add_option("--variant", ext_variant, "variant for an inline run");
  extend->add_option("--max-iter", ext_max_iter, "iterations for an inline run");
  extend->add_option("--J", Jopt, "prefix length to extend (default min(100, iterations))");
  extend->add_option("--digits", ext_digits, "context precision");
  extend->add_option("--cluster-width", cluster_width, "Ritz cluster threshold (x ||A||)");
  extend->add_option("--conv-tol", conv_tol, "Ritz convergence threshold (x ||A||)");
  extend->add_option("--half-width", half_width, "histogram even-bin half-width");

  // report
  auto* report = app.add_subcommand("report", "summarize an output directory");
  std::string report_dir = ".";
  report->add_option("--dir", report_dir, "directory with run-manifest.json");

  CLI11_PARSE(app, argc, argv);

  // canonical config string -> digest (stable across reruns)
  std::string canonical;
  {
    std::ostringstream cs;
    for (int i = 1; i < argc; ++i) cs << argv[i] << '\n';
    canonical = cs.str();
  }

  try {
    if (report->parsed()) return cmd_report(report_dir);

    Emitter em;
    em.dir = out_dir;
    fs::create_directories(em.dir);
    em.digest = hex64(fnv1a(canonical));

    int rc = 0;
    if (run->parsed()) {
      rc = cmd_run(run_p, split_csv(variants_arg), max_iter, replacement, rep_threshold, bundle,
                   meas_digits, em);
    } else if (bounds->parsed()) {
      rc = cmd_bounds(bounds_p, spectrum_file, intervals_arg, deltas, kmax, digits, em);
    } else if (spread->parsed()) {
      rc = cmd_spread_exact(spread_p, spread_spectrum, multiplicity, widths, width_is_half,
                            spread_digits, spread_max_iter, stop_tol, em);
    } else if (extend->parsed()) {
      rc = cmd_extend(bundle_path, ext_p, ext_variant, ext_max_iter, Jopt, ext_digits, cluster_width,
                      conv_tol, half_width, em);
    }
    em.finish(rc);
    return rc;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
