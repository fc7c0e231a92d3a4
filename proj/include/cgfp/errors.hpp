#pragma once

#include <stdexcept>
#include <string>

namespace cgfp {

enum class Errc {
  MalformedHeader,
  NotSquare,
  NotSymmetric,
  NonPositiveDiagonal,
  ZeroMatrix,
  BadSpectrum,
  OverlappingIntervals,
  DimensionTooLarge,
  DimensionMismatch,
  Breakdown,
  NotPositiveDefinite,
  MissingVectors,
  VariantMismatch,
  ZeroCoefficient,
  BinsOverlap,
  PrecisionTooLow,
  DegreeTooHigh,
  InvalidInput,
  IoError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::MalformedHeader:      return "MalformedHeader";
    case Errc::NotSquare:            return "NotSquare";
    case Errc::NotSymmetric:         return "NotSymmetric";
    case Errc::NonPositiveDiagonal:  return "NonPositiveDiagonal";
    case Errc::ZeroMatrix:           return "ZeroMatrix";
    case Errc::BadSpectrum:          return "BadSpectrum";
    case Errc::OverlappingIntervals: return "OverlappingIntervals";
    case Errc::DimensionTooLarge:    return "DimensionTooLarge";
    case Errc::DimensionMismatch:    return "DimensionMismatch";
    case Errc::Breakdown:            return "Breakdown";
    case Errc::NotPositiveDefinite:  return "NotPositiveDefinite";
    case Errc::MissingVectors:       return "MissingVectors";
    case Errc::VariantMismatch:      return "VariantMismatch";
    case Errc::ZeroCoefficient:      return "ZeroCoefficient";
    case Errc::BinsOverlap:          return "BinsOverlap";
    case Errc::PrecisionTooLow:      return "PrecisionTooLow";
    case Errc::DegreeTooHigh:        return "DegreeTooHigh";
    case Errc::InvalidInput:         return "InvalidInput";
    case Errc::IoError:              return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace cgfp
