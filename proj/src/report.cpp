#include "geovar/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "geovar/errors.hpp"

namespace geovar {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void dump_rec(const OJson& j, std::string& out, int indent, int depth) {
  std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  std::string pad1(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case OJson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad1;
        out += OJson(it.key()).dump();
        out += ": ";
        dump_rec(it.value(), out, indent, depth + 1);
      }
      out += "\n" + pad + "}";
      break;
    }
    case OJson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& el : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad1;
        dump_rec(el, out, indent, depth + 1);
      }
      out += "\n" + pad + "]";
      break;
    }
    case OJson::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    default:
      out += j.dump();
      break;
  }
}

}  // namespace

std::string dump_json(const OJson& j, int indent) {
  std::string out;
  dump_rec(j, out, indent, 0);
  out += "\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::IoError, "cannot open for writing: " + path);
  f << content;
  require(static_cast<bool>(f), ErrorKind::IoError, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::IoError, "cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string matrix_to_text(const Mat& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += " ";
      out += format_double(m(i, j));
    }
    out += "\n";
  }
  return out;
}

}  // namespace geovar
