#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rflab/core/types.hpp"

// Deterministic serialization helpers: fixed float formatting, FNV-1a file
// hashes and the run manifest. Re-running with identical inputs must
// reproduce every byte.
namespace rflab {

using ordered_json = nlohmann::ordered_json;

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class OutputBundle {
 public:
  explicit OutputBundle(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  void write_text(const std::string& name, const std::string& content) {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw GeometryError("cannot write " + name);
    out << content;
    out.close();
    record(name, content.size(), fnv1a(content));
  }

  void write_json(const std::string& name, const ordered_json& j) {
    write_text(name, j.dump(2) + "\n");
  }

  // hash an externally written file (e.g. OFF meshes)
  void record_file(const std::string& name) {
    std::ifstream in(path(name), std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    record(name, content.size(), fnv1a(content));
  }

  void set_constant(const std::string& key, double value) { constants_[key] = value; }
  void set_constant(const std::string& key, const std::string& value) { constants_[key] = value; }

  void write_manifest(const std::string& config_dump, std::uint64_t seed, bool all_passed) {
    ordered_json m;
    m["tool"] = "rflab";
    m["version"] = "0.1.0";
    m["seed"] = seed;
    m["config_hash"] = hex64(fnv1a(config_dump));
    m["certificates_passed"] = all_passed;
    m["constants"] = constants_;
    ordered_json files = ordered_json::array();
    for (const auto& f : files_) {
      ordered_json e;
      e["name"] = f.name;
      e["bytes"] = f.bytes;
      e["fnv64"] = hex64(f.hash);
      files.push_back(e);
    }
    m["files"] = files;
    write_text("manifest.json", m.dump(2) + "\n");
  }

 private:
  struct Entry {
    std::string name;
    std::uint64_t bytes;
    std::uint64_t hash;
  };
  void record(const std::string& name, std::uint64_t bytes, std::uint64_t hash) {
    for (auto& e : files_)
      if (e.name == name) {
        e.bytes = bytes;
        e.hash = hash;
        return;
      }
    files_.push_back({name, bytes, hash});
  }

  std::filesystem::path dir_;
  std::vector<Entry> files_;
  ordered_json constants_ = ordered_json::object();
};

// CSV writer with %.17g formatting.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(const std::vector<double>& values) {
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) line += ',';
      line += fmt_g17(values[i]);
    }
    rows_.push_back(std::move(line));
  }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (i) out += ',';
      out += header_[i];
    }
    out += '\n';
    for (const auto& r : rows_) {
      out += r;
      out += '\n';
    }
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

// Two-column gnuplot-style plot data.
inline std::string plot_data(const std::vector<double>& x, const std::vector<double>& y) {
  std::string out;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    out += fmt_g17(x[i]);
    out += ' ';
    out += fmt_g17(y[i]);
    out += '\n';
  }
  return out;
}

}  // namespace rflab
