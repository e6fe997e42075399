#pragma once

#include <filesystem>
#include <string>

namespace crosstrack {

/// Write-temp-then-rename so readers never observe a partial file.
void write_text_atomic(const std::string& text, const std::filesystem::path& path);

} // namespace crosstrack
