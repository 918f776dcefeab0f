#include "lkcell/model_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "lkcell/rng.hpp"

namespace lkcell {

namespace {

using json = nlohmann::json;

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json config_echo(const NetworkConfig& cfg, bool fused) {
  json j;
  j["name"] = cfg.name;
  j["depths"] = cfg.stage_depths;
  j["channels"] = cfg.stage_channels;
  j["num_classes"] = cfg.num_classes;
  j["kernels"] = cfg.stage_kernels;
  json br = json::array();
  for (const auto& [k, r] : cfg.branches) br.push_back({k, r});
  j["branches"] = br;
  j["fused"] = fused;
  return j;
}

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void write_str(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

struct Reader {
  const std::string& path;
  std::ifstream in;

  explicit Reader(const std::string& p) : path(p), in(p, std::ios::binary) {
    if (!in) throw IoError("cannot open weight file: " + p);
  }

  void read_bytes(void* dst, std::size_t n) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n)) {
      throw IoError("truncated weight file: " + path);
    }
  }

  std::uint32_t read_u32() {
    unsigned char b[4];
    read_bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }

  std::uint64_t read_u64() {
    unsigned char b[8];
    read_bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  std::string read_str() {
    const std::uint32_t n = read_u32();
    if (n > (1u << 24)) throw FormatError("unreasonable string length in " + path);
    std::string s(n, '\0');
    read_bytes(s.data(), n);
    return s;
  }
};

struct DirEntry {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
};

// f32 payloads are stored little-endian; on a big-endian host the bytes
// would need swapping. All supported targets are little-endian.
static_assert(std::endian::native == std::endian::little,
              "lkcw payload I/O assumes a little-endian host");

}  // namespace

void seeded_init(Network& net, std::uint64_t seed) {
  visit_params(net, [&](const ParamRef& p) {
    SplitMix64 rng = tensor_stream(seed, p.name);
    if (ends_with(p.name, ".weight")) {
      std::size_t fan_in = 1;
      for (std::size_t d = 1; d < p.dims.size(); ++d) {
        fan_in *= static_cast<std::size_t>(p.dims[d]);
      }
      const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
      for (std::size_t i = 0; i < p.size; ++i) {
        p.data[i] = static_cast<float>(rng.next_symmetric(bound));
      }
    } else if (ends_with(p.name, ".bias")) {
      std::fill(p.data, p.data + p.size, 0.0f);
    } else if (ends_with(p.name, ".gamma") || ends_with(p.name, ".var")) {
      for (std::size_t i = 0; i < p.size; ++i) {
        p.data[i] = static_cast<float>(0.9 + 0.2 * rng.next_unit());
      }
    } else if (ends_with(p.name, ".beta") || ends_with(p.name, ".mean")) {
      for (std::size_t i = 0; i < p.size; ++i) {
        p.data[i] = static_cast<float>(-0.1 + 0.2 * rng.next_unit());
      }
    } else {
      throw ConfigError("seeded_init: unrecognized tensor name " + p.name);
    }
  });
}

void save_network(const Network& net, const std::string& path) {
  struct Entry {
    std::string name;
    std::vector<int> dims;
    const float* data;
    std::size_t size;
  };
  std::vector<Entry> entries;
  visit_params(net, [&](const std::string& name, const std::vector<int>& dims,
                        const float* data, std::size_t size, bool) {
    entries.push_back({name, dims, data, size});
  });

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write weight file: " + path);

    os.write("LKCW", 4);
    write_u32(os, 1);
    write_str(os, net.config.name);
    write_str(os, config_echo(net.config, net.fused).dump());

    write_u64(os, entries.size());
    std::uint64_t offset = 0;
    for (const auto& e : entries) {
      write_str(os, e.name);
      write_u32(os, static_cast<std::uint32_t>(e.dims.size()));
      for (int d : e.dims) write_u64(os, static_cast<std::uint64_t>(d));
      write_u32(os, 0);  // dtype f32
      write_u64(os, offset);
      write_u64(os, e.size * sizeof(float));
      offset += e.size * sizeof(float);
    }
    for (const auto& e : entries) {
      os.write(reinterpret_cast<const char*>(e.data),
               static_cast<std::streamsize>(e.size * sizeof(float)));
    }
    if (!os) throw IoError("failed writing weight file: " + path);
  }
  std::filesystem::rename(tmp, path);
}

Network load_network(const std::string& path, const NetworkConfig& config) {
  Reader r(path);

  char magic[4];
  r.read_bytes(magic, 4);
  if (std::memcmp(magic, "LKCW", 4) != 0) {
    throw FormatError("not a lkcw weight file (bad magic): " + path);
  }
  const std::uint32_t version = r.read_u32();
  if (version != 1) {
    throw FormatError("unsupported lkcw version " + std::to_string(version) +
                      " in " + path);
  }
  r.read_str();  // variant name (provenance only)
  const std::string echo_text = r.read_str();
  bool fused = false;
  try {
    const json echo = json::parse(echo_text);
    fused = echo.value("fused", false);
  } catch (const json::exception& e) {
    throw FormatError("unparseable config echo in " + path + ": " + e.what());
  }

  const std::uint64_t count = r.read_u64();
  if (count > 1'000'000) throw FormatError("unreasonable tensor count in " + path);
  std::map<std::string, DirEntry> directory;
  std::uint64_t payload_bytes = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    DirEntry e;
    e.name = r.read_str();
    const std::uint32_t ndims = r.read_u32();
    if (ndims > 8) throw FormatError("unreasonable rank for tensor " + e.name);
    for (std::uint32_t d = 0; d < ndims; ++d) e.dims.push_back(r.read_u64());
    const std::uint32_t dtype = r.read_u32();
    if (dtype != 0) {
      throw FormatError("unsupported dtype " + std::to_string(dtype) +
                        " for tensor " + e.name);
    }
    e.offset = r.read_u64();
    e.length = r.read_u64();
    if (e.offset != payload_bytes) {
      throw FormatError("tensor " + e.name + " has non-contiguous payload offset");
    }
    payload_bytes += e.length;
    if (!directory.emplace(e.name, e).second) {
      throw FormatError("duplicate tensor " + e.name + " in " + path);
    }
  }

  const std::uint64_t payload_start = static_cast<std::uint64_t>(r.in.tellg());

  Network net = build_network_structure(config);
  net.fused = fused;
  if (fused) net = reparameterize_network(net);

  std::vector<std::string> missing;
  visit_params(net, [&](const ParamRef& p) {
    auto it = directory.find(p.name);
    if (it == directory.end()) {
      throw ConfigError("weight file does not match config '" + config.name +
                        "': tensor " + p.name + " missing from " + path);
    }
    const DirEntry& e = it->second;
    std::uint64_t elems = 1;
    for (auto d : e.dims) elems *= d;
    bool dims_match = e.dims.size() == p.dims.size();
    for (std::size_t d = 0; dims_match && d < e.dims.size(); ++d) {
      dims_match = e.dims[d] == static_cast<std::uint64_t>(p.dims[d]);
    }
    if (!dims_match || elems != p.size || e.length != p.size * sizeof(float)) {
      throw ConfigError("weight file does not match config '" + config.name +
                        "': tensor " + p.name + " has mismatched dims in " + path);
    }
    r.in.seekg(static_cast<std::streamoff>(payload_start + e.offset));
    r.read_bytes(p.data, p.size * sizeof(float));
    directory.erase(it);
  });

  if (!directory.empty()) {
    throw ConfigError("weight file does not match config '" + config.name +
                      "': unexpected tensor " + directory.begin()->first + " in " +
                      path);
  }
  return net;
}

}  // namespace lkcell
