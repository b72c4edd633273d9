#include "fpr/io.hpp"

#include <cstdio>
#include <fstream>

#include "fpr/errors.hpp"

namespace fpr {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace fpr
