#pragma once

#include <filesystem>
#include <string>

namespace qgd {

std::string read_text(const std::filesystem::path& path);

// Writes to a temp file in the target directory, then renames over the
// destination. Readers never observe a partially written artifact.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

// Shortest round-trip decimal form of a double (to_chars); parsing it back
// recovers the exact bit pattern for any finite value.
std::string format_double(double x);

} // namespace qgd
