#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "symreg/errors.hpp"
#include "symreg/model.hpp"

namespace symreg {

namespace {

constexpr char kMagic[8] = {'S', 'Y', 'M', 'R', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O writes raw little-endian doubles");

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("checkpoint: truncated file");
  return v;
}

nlohmann::json config_json(const ModelConfig& c) {
  return {{"vocab_size", c.vocab_size}, {"token_arity", c.token_arity},
          {"embed_dim", c.embed_dim},   {"layers", c.layers},
          {"heads", c.heads},           {"ff_dim", c.ff_dim},
          {"max_seq_len", c.max_seq_len}, {"l2", c.l2},
          {"learning_rate", c.learning_rate}, {"entropy_term", c.entropy_term},
          {"optimizer", c.optimizer}};
}

}  // namespace

void save_checkpoint(const PolicyValueNet& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("checkpoint: cannot open " + path + " for writing");
  nlohmann::json header;
  header["config"] = config_json(net.config());
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, slot] : net.layout().named()) {
    tensors.push_back({{"name", name}, {"rows", slot.rows}, {"cols", slot.cols}});
  }
  header["tensors"] = tensors;
  const std::string text = header.dump();
  os.write(kMagic, sizeof(kMagic));
  write_pod(os, kVersion);
  write_pod(os, static_cast<std::uint64_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_pod(os, static_cast<std::uint64_t>(net.param_count()));
  os.write(reinterpret_cast<const char*>(net.params().data()),
           static_cast<std::streamsize>(net.param_count() * sizeof(double)));
  if (!os) throw DataError("checkpoint: write failed for " + path);
}

PolicyValueNet load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("checkpoint: bad magic in " + path);
  }
  const auto version = read_pod<std::uint32_t>(is);
  if (version != kVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto header_len = read_pod<std::uint64_t>(is);
  std::string text(header_len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!is) throw DataError("checkpoint: truncated header");
  const auto header = nlohmann::json::parse(text);
  const auto& j = header.at("config");
  ModelConfig cfg;
  cfg.vocab_size = j.at("vocab_size").get<int>();
  cfg.token_arity = j.at("token_arity").get<std::vector<int>>();
  cfg.embed_dim = j.at("embed_dim").get<int>();
  cfg.layers = j.at("layers").get<int>();
  cfg.heads = j.at("heads").get<int>();
  cfg.ff_dim = j.at("ff_dim").get<int>();
  cfg.max_seq_len = j.at("max_seq_len").get<int>();
  cfg.l2 = j.at("l2").get<double>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.entropy_term = j.at("entropy_term").get<bool>();
  cfg.optimizer = j.at("optimizer").get<std::string>();
  PolicyValueNet net(cfg);
  const auto count = read_pod<std::uint64_t>(is);
  if (count != net.param_count()) {
    throw DataError("checkpoint: parameter count " + std::to_string(count) +
                    " does not match config (" + std::to_string(net.param_count()) + ")");
  }
  is.read(reinterpret_cast<char*>(net.params().data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw DataError("checkpoint: truncated parameters");
  return net;
}

}  // namespace symreg
