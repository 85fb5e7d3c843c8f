#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "hippoicl/discretize.hpp"

namespace hippoicl {

class FormatError : public Error {
 public:
  using Error::Error;
};

/**
 * Saved predictor. File layout, integers and floats little-endian:
 *   8 bytes    magic "HIPPOICL"
 *   u32        format version (1)
 *   u32        header length H
 *   H bytes    JSON header: {"n_state", "dt", "basis", "provenance",
 *              "config_hash", "payload_doubles"}
 *   f64[...]   a_bar (row-major), b_bar, c_bar, d_bar
 */
struct ModelArtifact {
  static constexpr std::uint32_t kFormatVersion = 1;

  DiscreteSSM model;
  std::string basis;       // e.g. "legt:N=65:theta=10"
  std::string provenance = "constructed";  // or "trained"
  std::string config_hash;                 // empty for constructed models
};

void write_model(const ModelArtifact& artifact, std::ostream& out);
/// Throws FormatError on bad magic, unsupported version, malformed header or
/// a payload that disagrees with the header.
ModelArtifact read_model(std::istream& in);

void save_model(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_model(const std::string& path);

}  // namespace hippoicl
