#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cgfp/bounds.hpp"
#include "cgfp/cg.hpp"
#include "cgfp/diagnostics.hpp"
#include "cgfp/hiprec.hpp"

#include <json.hpp>

namespace cgfp {

// FNV-1a 64-bit; used for config digests and manifest content hashes.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Round-trip exact formatting for doubles.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt(const BigFloat& v, int digits = 0) { return v.str(digits); }

// Trace CSV: one row per step k with the coefficients, norms and error
// series; a # comment line carries the config digest so reruns are
// byte-comparable.
inline std::string trace_csv(const CGTrace<double>& tr, const ErrorHistory& hist,
                             const std::string& config_digest) {
  std::ostringstream os;
  os << "# config=" << config_digest << "\n";
  os << "k,a,b,rnorm,true_rnorm,anorm_err_rel,updated_anorm_err_rel,replaced\n";
  const std::size_t K = tr.iterations();
  auto replaced_at = [&](std::size_t k) {
    for (std::size_t r : tr.replacement_steps)
      if (r == k) return 1;
    return 0;
  };
  for (std::size_t k = 0; k <= K; ++k) {
    os << k << ",";
    if (k < tr.coeff_a.size()) os << fmt(tr.coeff_a[k]);
    os << ",";
    if (k >= 1) os << fmt(tr.coeff_b[k - 1]);
    os << "," << fmt(tr.rnorm[k]) << "," << fmt(tr.true_rnorm[k]) << ","
       << fmt(hist.anorm_err_rel[k]) << "," << fmt(hist.updated_anorm_err_rel[k]) << ","
       << replaced_at(k) << "\n";
  }
  return os.str();
}

// Full trace bundle (vectors included when recorded); exact values survive
// the round trip through %.17g.
inline nlohmann::json trace_json(const CGTrace<double>& tr, bool include_vectors) {
  nlohmann::json j;
  j["variant"] = variant_name(tr.variant);
  j["iterations"] = tr.iterations();
  j["stop"] = stop_reason_name(tr.stop);
  if (!tr.stop_detail.empty()) j["stop_detail"] = tr.stop_detail;
  j["coeff_a"] = tr.coeff_a;
  j["coeff_b"] = tr.coeff_b;
  j["rnorm"] = tr.rnorm;
  j["true_rnorm"] = tr.true_rnorm;
  j["anorm_err"] = tr.anorm_err;
  j["updated_anorm_err"] = tr.updated_anorm_err;
  j["replacement_steps"] = tr.replacement_steps;
  j["negative_coeff_steps"] = tr.negative_coeff_steps;
  if (include_vectors) {
    j["iterates"] = tr.iterates;
    j["updated_residuals"] = tr.updated_residuals;
    j["aux_p"] = tr.aux_p;
    if (!tr.aux_s.empty()) j["aux_s"] = tr.aux_s;
    if (!tr.aux_w.empty()) j["aux_w"] = tr.aux_w;
    if (!tr.aux_u.empty()) j["aux_u"] = tr.aux_u;
    if (!tr.aux_t.empty()) j["aux_t"] = tr.aux_t;
  }
  return j;
}

inline CGTrace<double> trace_from_json(const nlohmann::json& j) {
  CGTrace<double> tr;
  tr.variant = variant_from_name(j.at("variant").get<std::string>());
  tr.coeff_a = j.at("coeff_a").get<std::vector<double>>();
  tr.coeff_b = j.at("coeff_b").get<std::vector<double>>();
  tr.rnorm = j.at("rnorm").get<std::vector<double>>();
  tr.true_rnorm = j.at("true_rnorm").get<std::vector<double>>();
  tr.anorm_err = j.at("anorm_err").get<std::vector<double>>();
  tr.updated_anorm_err = j.at("updated_anorm_err").get<std::vector<double>>();
  tr.replacement_steps = j.at("replacement_steps").get<std::vector<std::size_t>>();
  if (j.contains("negative_coeff_steps"))
    tr.negative_coeff_steps = j.at("negative_coeff_steps").get<std::vector<std::size_t>>();
  if (j.contains("iterates")) tr.iterates = j.at("iterates").get<std::vector<Vec<double>>>();
  if (j.contains("updated_residuals"))
    tr.updated_residuals = j.at("updated_residuals").get<std::vector<Vec<double>>>();
  if (j.contains("aux_p")) tr.aux_p = j.at("aux_p").get<std::vector<Vec<double>>>();
  if (j.contains("aux_s")) tr.aux_s = j.at("aux_s").get<std::vector<Vec<double>>>();
  if (j.contains("aux_w")) tr.aux_w = j.at("aux_w").get<std::vector<Vec<double>>>();
  if (j.contains("aux_u")) tr.aux_u = j.at("aux_u").get<std::vector<Vec<double>>>();
  if (j.contains("aux_t")) tr.aux_t = j.at("aux_t").get<std::vector<Vec<double>>>();
  return tr;
}

// Diagnostics summary for one variant.
inline nlohmann::json diagnostics_json(const LanczosDiagnostics& d, const Definiteness& def,
                                       std::size_t plateau_index) {
  nlohmann::json j;
  j["eps1"] = d.eps1;
  j["eps2"] = d.eps2;
  j["eps3"] = d.eps3;
  j["qnorm_min"] = d.qnorm_range.first;
  j["qnorm_max"] = d.qnorm_range.second;
  j["plateau_index"] = plateau_index;
  j["T_min_eig"] = def.min_eig;
  j["T_positive_definite"] = def.positive_definite;
  return j;
}

inline std::string bounds_csv(const std::vector<std::pair<std::size_t, std::string>>& rows,
                              const std::string& kind, const std::string& params_digest,
                              const std::string& config_digest) {
  std::ostringstream os;
  os << "# config=" << config_digest << "\n";
  os << "k,value,kind,params\n";
  for (const auto& [k, v] : rows) os << k << "," << v << "," << kind << "," << params_digest << "\n";
  return os.str();
}

inline std::string histogram_csv(const HistogramReport& h, const std::string& config_digest) {
  std::ostringstream os;
  os << "# config=" << config_digest << "\n";
  os << "bin_index,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) os << (i + 1) << "," << h.counts[i] << "\n";
  return os.str();
}

inline std::string eig_distance_csv(const ExtendResult& ext, const std::vector<double>& spectrum,
                                    const std::string& config_digest) {
  std::ostringstream os;
  os << "# config=" << config_digest << "\n";
  os << "eig,nearest_lambda,distance\n";
  for (std::size_t i = 0; i < ext.eigenvalues.size(); ++i) {
    double ev = ext.eigenvalues[i].to_double();
    double best = spectrum.empty() ? 0.0 : spectrum[0];
    for (double lam : spectrum)
      if (std::abs(lam - ev) < std::abs(best - ev)) best = lam;
    os << fmt(ext.eigenvalues[i], 30) << "," << fmt(best) << "," << fmt(ext.eig_distances[i])
       << "\n";
  }
  return os.str();
}

inline std::string match_report_csv(const MatchReport& rep, const std::string& config_digest) {
  std::ostringstream os;
  os << "# config=" << config_digest << "\n";
  os << "k,fp_err_rel,exact_err_rel,ratio\n";
  for (std::size_t k = 0; k < rep.fp_err_rel.size(); ++k) {
    os << k << "," << fmt(rep.fp_err_rel[k]) << "," << fmt(rep.exact_err_rel[k]) << ",";
    if (k >= 1) os << fmt(rep.ratio[k - 1]);
    os << "\n";
  }
  return os.str();
}

// T entries in decimal text at full context precision.
inline std::string tridiagonal_text(const Tridiagonal<BigFloat>& T, int digits) {
  std::ostringstream os;
  os << "alpha " << T.alpha.size() << "\n";
  for (const auto& a : T.alpha) os << fmt(a, digits) << "\n";
  os << "beta " << T.beta.size() << "\n";
  for (const auto& b : T.beta) os << fmt(b, digits) << "\n";
  os << "beta_last\n" << fmt(T.beta_last, digits) << "\n";
  return os.str();
}

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot open " + path + " for writing");
  out << body;
  if (!out) fail(Errc::IoError, "failed writing " + path);
}

}  // namespace cgfp
