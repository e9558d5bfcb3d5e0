#pragma once

// Plain CSV tables: '.' decimal separator, 17 significant digits, LF endings.

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "wkam/error.hpp"

namespace wkam {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(long v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "1" : "0"; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Table() = default;
  explicit Table(std::vector<std::string> h) : header(std::move(h)) {}

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  void write(std::ostream& os) const {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) os << ',';
        os << cells[k];
      }
      os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  }

  std::string str() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("write to '" + path + "' failed");
}

}  // namespace wkam
