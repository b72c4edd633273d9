#pragma once

#include <filesystem>
#include <string>

namespace fpr {

/// Round-trip formatting (%.17g) so CSV outputs are byte-stable.
std::string fmt(double v);

/// Opens `path` for writing, creating parent directories; throws Io on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace fpr
