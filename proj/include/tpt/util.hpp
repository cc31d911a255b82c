#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tpt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVecRef = const Eigen::Ref<const Eigen::VectorXd>&;

// exit-code categories used by the CLI
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingArtifact : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool file_exists(const std::string& path) {
  std::ifstream f(path);
  return f.good();
}

// FNV-1a over file bytes; used to verify that two artifacts are the same file
inline std::uint64_t file_hash(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingArtifact("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (f.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------- CSV of doubles ----------------

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<Vec>& rows, const std::vector<std::string>& comments = {}) {
  std::ofstream f(path);
  if (!f) throw MissingArtifact("cannot write " + path);
  f.precision(17);
  for (const auto& c : comments) f << "# " << c << "\n";
  for (std::size_t j = 0; j < header.size(); ++j) f << header[j] << (j + 1 < header.size() ? "," : "\n");
  for (const auto& r : rows) {
    for (int j = 0; j < r.size(); ++j) f << r[j] << (j + 1 < r.size() ? "," : "\n");
  }
}

// Reads a numeric CSV; '#' lines and a non-numeric header line are skipped.
inline std::vector<Vec> read_csv(const std::string& path, std::vector<std::string>* header = nullptr) {
  std::ifstream f(path);
  if (!f) throw MissingArtifact("cannot open " + path);
  std::vector<Vec> rows;
  std::string line;
  bool first_content = true;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    bool numeric = true;
    std::vector<std::string> toks;
    while (std::getline(ss, tok, ',')) {
      toks.push_back(tok);
      try {
        std::size_t pos = 0;
        vals.push_back(std::stod(tok, &pos));
        while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
        if (pos != tok.size()) numeric = false;
      } catch (...) {
        numeric = false;
      }
      if (!numeric) break;
    }
    if (!numeric) {
      if (first_content) {
        if (header) *header = toks;
        first_content = false;
        continue;
      }
      throw ConfigError("non-numeric row in " + path + ": " + line);
    }
    first_content = false;
    rows.emplace_back(Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size())));
  }
  return rows;
}

// ---------------- flat key=value files ----------------

inline void write_kv(const std::string& path, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream f(path);
  if (!f) throw MissingArtifact("cannot write " + path);
  for (const auto& [k, v] : kv) f << k << " = " << v << "\n";
}

inline std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MissingArtifact("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("bad config line: " + line);
    auto trim = [](std::string s) {
      const char* ws = " \t\r";
      s.erase(0, s.find_first_not_of(ws));
      s.erase(s.find_last_not_of(ws) + 1);
      return s;
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

inline std::string fmt_g(double x, int prec = 17) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
  return buf;
}

}  // namespace tpt
