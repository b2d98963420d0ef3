#include "gcattack/dataset.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "gcattack/error.hpp"
#include "gcattack/graph_io.hpp"

namespace gcattack {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void Dataset::add(std::span<const double> x, LabelState y) {
  if (x.size() != dim_) {
    throw Error(ErrorCode::ShapeMismatch, "sample has dimension " + std::to_string(x.size()) +
                                              ", dataset has " + std::to_string(dim_));
  }
  if (y.size() != num_labels_) {
    throw Error(ErrorCode::ShapeMismatch, "sample has " + std::to_string(y.size()) + " labels, dataset has " +
                                              std::to_string(num_labels_));
  }
  features_.insert(features_.end(), x.begin(), x.end());
  labels_.push_back(std::move(y));
}

void SyntheticDatasetConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (samples == 0) fail("sample count must be positive");
  if (dim == 0) fail("dimension must be positive");
  if (!(leaf_probability > 0.0 && leaf_probability < 1.0)) fail("leaf probability must lie in (0, 1)");
  if (!(noise_std >= 0.0)) fail("noise standard deviation must be non-negative");
  if (!(prototype_scale > 0.0)) fail("prototype scale must be positive");
}

std::vector<std::vector<double>> leaf_prototypes(const LabelGraph& g, const SyntheticDatasetConfig& config) {
  const LabelSet leaves = g.leaves();
  std::mt19937_64 rng(mix_seed(config.seed, 0xC0FFEE));
  std::normal_distribution<double> dist(0.0, config.prototype_scale);
  std::vector<std::vector<double>> out(leaves.size(), std::vector<double>(config.dim));
  for (auto& row : out) {
    for (double& v : row) v = dist(rng);
  }
  return out;
}

Dataset generate_synthetic(const LabelGraph& g, const SyntheticDatasetConfig& config) {
  config.validate();
  const LabelSet leaves = g.leaves();
  if (leaves.empty()) throw Error(ErrorCode::NoLeaves, "graph has no leaves");
  const auto prototypes = leaf_prototypes(g, config);

  Dataset data(config.dim, g.size());
  data.graph_hash = graph_hash(g);
  data.seed = config.seed;

  std::mt19937_64 rng(mix_seed(config.seed, config.stream + 1));
  std::bernoulli_distribution leaf_on(config.leaf_probability);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto topo = g.topological_order();

  std::vector<double> x(config.dim);
  for (std::size_t n = 0; n < config.samples; ++n) {
    std::vector<bool> active(leaves.size());
    bool any = false;
    while (!any) {
      for (std::size_t k = 0; k < leaves.size(); ++k) {
        active[k] = leaf_on(rng);
        any = any || active[k];
      }
    }
    LabelState y(g.size());
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t k = 0; k < leaves.size(); ++k) {
      if (!active[k]) continue;
      y.set(leaves[k], Sign::Present);
      for (std::size_t j = 0; j < x.size(); ++j) x[j] += prototypes[k][j];
    }
    // Upward closure: a label is ON iff one of its children is ON.
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      for (LabelId c : g.children(*it)) {
        if (y.on(c)) {
          y.set(*it, Sign::Present);
          break;
        }
      }
    }
    if (config.noise_std > 0.0) {
      for (double& v : x) v += config.noise_std * noise(rng);
    }
    data.add(x, std::move(y));
  }
  return data;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, end);
}

double parse_double(std::string_view token, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad number '" +
                                           std::string(token) + "'");
  }
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * b)) & 0xFF));
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw Error(ErrorCode::ParseError, "binary dataset is truncated");
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + b])) << (8 * b);
  }
  pos += sizeof(T);
  return static_cast<T>(v);
}

}  // namespace

std::string serialize_dataset_text(const Dataset& data) {
  std::string out = "gcattack-dataset 1\n";
  out += std::to_string(data.size()) + " " + std::to_string(data.dim()) + " " +
         std::to_string(data.num_labels()) + " " + hex64(data.graph_hash) + " " + std::to_string(data.seed) +
         "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.features(i)) {
      append_double(out, v);
      out += ' ';
    }
    out += '|';
    for (Sign s : data.labels(i).signs()) out += s == Sign::Present ? " +1" : " -1";
    out += '\n';
  }
  return out;
}

Dataset parse_dataset_text(std::string_view text) {
  std::size_t line_no = 0;
  auto next_line = [&text, &line_no]() -> std::string_view {
    if (text.empty()) throw Error(ErrorCode::ParseError, "dataset ends after line " + std::to_string(line_no));
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    return line;
  };
  if (split_ws(next_line()) != std::vector<std::string_view>{"gcattack-dataset", "1"}) {
    throw Error(ErrorCode::ParseError, "line 1: expected 'gcattack-dataset 1'");
  }
  const auto header = split_ws(next_line());
  if (header.size() != 5) throw Error(ErrorCode::ParseError, "line 2: expected 'n d C graph_hash seed'");
  auto to_size = [](std::string_view tok, int base) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, base);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw Error(ErrorCode::ParseError, "line 2: bad header field '" + std::string(tok) + "'");
    }
    return v;
  };
  const std::size_t n = to_size(header[0], 10);
  Dataset data(to_size(header[1], 10), to_size(header[2], 10));
  data.graph_hash = to_size(header[3], 16);
  data.seed = to_size(header[4], 10);

  std::vector<double> x(data.dim());
  for (std::size_t i = 0; i < n; ++i) {
    const auto tokens = split_ws(next_line());
    if (tokens.size() != data.dim() + 1 + data.num_labels() || tokens[data.dim()] != "|") {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(data.dim()) + " features, '|', " +
                                             std::to_string(data.num_labels()) + " signs");
    }
    for (std::size_t j = 0; j < data.dim(); ++j) x[j] = parse_double(tokens[j], line_no);
    std::vector<int> signs;
    for (std::size_t c = 0; c < data.num_labels(); ++c) {
      const auto tok = tokens[data.dim() + 1 + c];
      if (tok == "+1" || tok == "1") {
        signs.push_back(1);
      } else if (tok == "-1") {
        signs.push_back(-1);
      } else {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad sign '" +
                                               std::string(tok) + "'");
      }
    }
    data.add(x, LabelState::from_ints(signs));
  }
  return data;
}

std::string serialize_dataset_binary(const Dataset& data) {
  std::string out = "GCDS";
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint64_t>(out, data.size());
  put_le<std::uint64_t>(out, data.dim());
  put_le<std::uint64_t>(out, data.num_labels());
  put_le<std::uint64_t>(out, data.graph_hash);
  put_le<std::uint64_t>(out, data.seed);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.features(i)) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    for (Sign s : data.labels(i).signs()) out.push_back(static_cast<char>(static_cast<std::int8_t>(s)));
  }
  return out;
}

Dataset parse_dataset_binary(std::string_view bytes) {
  if (bytes.substr(0, 4) != "GCDS") throw Error(ErrorCode::ParseError, "not a binary gcattack dataset");
  std::size_t pos = 4;
  if (get_le<std::uint32_t>(bytes, pos) != 1) {
    throw Error(ErrorCode::ParseError, "unsupported binary dataset version");
  }
  const std::size_t n = get_le<std::uint64_t>(bytes, pos);
  const std::size_t d = get_le<std::uint64_t>(bytes, pos);
  const std::size_t c = get_le<std::uint64_t>(bytes, pos);
  Dataset data(d, c);
  data.graph_hash = get_le<std::uint64_t>(bytes, pos);
  data.seed = get_le<std::uint64_t>(bytes, pos);
  std::vector<double> x(d);
  std::vector<int> signs(c);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : x) v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
    for (int& s : signs) s = static_cast<std::int8_t>(get_le<std::uint8_t>(bytes, pos));
    data.add(x, LabelState::from_ints(signs));
  }
  if (pos != bytes.size()) throw Error(ErrorCode::ParseError, "trailing bytes after binary dataset");
  return data;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  write_text_file(path, path.extension() == ".bin" ? serialize_dataset_binary(data)
                                                   : serialize_dataset_text(data));
}

Dataset load_dataset(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  try {
    return path.extension() == ".bin" ? parse_dataset_binary(bytes) : parse_dataset_text(bytes);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

}  // namespace gcattack
