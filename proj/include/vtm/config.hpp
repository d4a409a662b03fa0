#pragma once

/// Flat key=value configuration: optional file, overridden by key=value
/// pairs given on the command line. Lines starting with '#' are comments.

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "vtm/core.hpp"

namespace vtm {

struct Config {
  std::map<std::string, std::string> kv;

  static std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  void set_pair(const std::string& line) {
    size_t eq = line.find('=');
    require(eq != std::string::npos, "config: expected key=value, got " + line);
    std::string k = trim(line.substr(0, eq));
    std::string v = trim(line.substr(eq + 1));
    require(!k.empty(), "config: empty key in " + line);
    kv[k] = v;
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "config: cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      size_t eq = t.find('=');
      require(eq != std::string::npos && !trim(t.substr(0, eq)).empty(),
              "config: " + path + ":" + std::to_string(lineno) +
                  ": expected key=value, got '" + t + "'");
      kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
  }

  bool has(const std::string& k) const { return kv.count(k) > 0; }

  std::string get_string(const std::string& k, const std::string& dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
  }
  double get_double(const std::string& k, double dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    return std::stod(it->second);
  }
  int get_int(const std::string& k, int dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    return std::stoi(it->second);
  }
  bool get_bool(const std::string& k, bool dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    require(false, "config: bad bool value " + v + " for " + k);
    return dflt;
  }
};

/// Output root: VTM_OUTPUT_ROOT env var, else the current directory.
inline std::string output_root() {
  const char* env = std::getenv("VTM_OUTPUT_ROOT");
  return env && *env ? env : ".";
}

/// Build-time git revision, for run metadata.
inline std::string git_revision() {
#ifdef VTM_GIT_REV
  return VTM_GIT_REV;
#else
  return "unknown";
#endif
}

} // namespace vtm
