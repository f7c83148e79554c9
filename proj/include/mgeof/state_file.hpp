#pragma once

// Plain-text state files:
//
//   version 1
//   n_modes 2
//   ordering qqpp
//   label <free text>          (optional)
//   provenance <free text>     (optional)
//   covariance
//   <2N rows of 2N numbers>
//   displacement              (optional, zero when absent)
//   <2N numbers>
//
// Blank lines and lines starting with '#' are ignored. Numbers are written
// with 17 significant digits and parsed independently of the C locale.

#include "mgeof/gcore.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace mgeof {

inline constexpr int kStateFileVersion = 1;

/// Parsed payload before any physics validation; the covariance matrix is kept
/// exactly as written so asymmetry can be reported.
struct RawStateFile {
  int version = kStateFileVersion;
  int n_modes = 0;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd displacement;
  std::string label;
  std::string provenance;

  /// Throws ValidationError for an asymmetric matrix.
  GaussianState to_state() const;
};

/// Throws ParseError with a line number on malformed input, an unknown
/// version or any ordering other than qqpp.
RawStateFile parse_state_text(std::string_view text);
RawStateFile read_state_file(const std::filesystem::path& path);

std::string serialize_state(const GaussianState& state, std::string_view label = {},
                            std::string_view provenance = {});
/// Renders the whole file before opening the target.
void write_state_file(const std::filesystem::path& path, const GaussianState& state, std::string_view label = {},
                      std::string_view provenance = {});

/// "%.17g" in the C locale: 17 significant digits, trailing zeros dropped.
std::string format_number(double value);

}  // namespace mgeof
