#include "hippoicl/model_io.hpp"

#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hippoicl/byte_io.hpp"

namespace hippoicl {

namespace {

constexpr char kMagic[8] = {'H', 'I', 'P', 'P', 'O', 'I', 'C', 'L'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4] = {};
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (in.gcount() != 4) throw FormatError("model file truncated in preamble");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

std::size_t payload_doubles(std::size_t n) { return n * n + 2 * n + 1; }

}  // namespace

void write_model(const ModelArtifact& artifact, std::ostream& out) {
  const DiscreteSSM& m = artifact.model;
  const auto n = static_cast<std::size_t>(m.b_bar.size());
  if (m.a_bar.rows() != m.b_bar.size() || m.a_bar.cols() != m.b_bar.size() ||
      m.c_bar.size() != m.b_bar.size()) {
    throw Error("write_model: inconsistent model shapes");
  }
  const nlohmann::json header = {
      {"n_state", n},
      {"dt", m.dt},
      {"basis", artifact.basis},
      {"provenance", artifact.provenance},
      {"config_hash", artifact.config_hash},
      {"payload_doubles", payload_doubles(n)},
  };
  const std::string text = header.dump();
  out.write(kMagic, sizeof kMagic);
  put_u32(out, ModelArtifact::kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (Eigen::Index i = 0; i < m.a_bar.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.a_bar.cols(); ++j) byte_io::put_f64(out, m.a_bar(i, j));
  }
  for (Eigen::Index i = 0; i < m.b_bar.size(); ++i) byte_io::put_f64(out, m.b_bar(i));
  for (Eigen::Index i = 0; i < m.c_bar.size(); ++i) byte_io::put_f64(out, m.c_bar(i));
  byte_io::put_f64(out, m.d_bar);
}

ModelArtifact read_model(std::istream& in) {
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() != sizeof magic || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw FormatError("not a model file (bad magic)");
  }
  const std::uint32_t version = get_u32(in);
  if (version != ModelArtifact::kFormatVersion) {
    std::ostringstream msg;
    msg << "unsupported model format version " << version << " (expected "
        << ModelArtifact::kFormatVersion << ")";
    throw FormatError(msg.str());
  }
  const std::uint32_t header_len = get_u32(in);
  std::string text(header_len, '\0');
  in.read(text.data(), header_len);
  if (static_cast<std::uint32_t>(in.gcount()) != header_len) {
    throw FormatError("model file truncated in header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model header: ") + e.what());
  }

  ModelArtifact artifact;
  std::size_t n = 0;
  std::size_t declared = 0;
  try {
    n = header.at("n_state").get<std::size_t>();
    declared = header.at("payload_doubles").get<std::size_t>();
    artifact.model.dt = header.at("dt").get<double>();
    artifact.basis = header.value("basis", "");
    artifact.provenance = header.value("provenance", "constructed");
    artifact.config_hash = header.value("config_hash", "");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model header is missing fields: ") + e.what());
  }
  if (n == 0 || n > 100000 || declared != payload_doubles(n)) {
    std::ostringstream msg;
    msg << "model header n_state=" << n << " disagrees with payload length " << declared;
    throw FormatError(msg.str());
  }

  std::vector<double> payload(declared);
  try {
    for (auto& v : payload) v = byte_io::get_f64(in);
  } catch (const Error&) {
    throw FormatError("model payload shorter than the header declares");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("model payload longer than the header declares");
  }

  const auto ni = static_cast<Eigen::Index>(n);
  DiscreteSSM& m = artifact.model;
  m.a_bar.resize(ni, ni);
  m.b_bar.resize(ni);
  m.c_bar.resize(ni);
  std::size_t pos = 0;
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index j = 0; j < ni; ++j) m.a_bar(i, j) = payload[pos++];
  }
  for (Eigen::Index i = 0; i < ni; ++i) m.b_bar(i) = payload[pos++];
  for (Eigen::Index i = 0; i < ni; ++i) m.c_bar(i) = payload[pos++];
  m.d_bar = payload[pos];
  return artifact;
}

void save_model(const ModelArtifact& artifact, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_model(artifact, out);
}

ModelArtifact load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_model(in);
}

}  // namespace hippoicl
