#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sweepdyn::detail {

/// Writes `content` to `path` atomically: the bytes land in a sibling temp
/// file which is then renamed over the target, so readers never observe a
/// partially written artifact. Throws invalid_config on filesystem failure.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

/// Reads a whole file into a string. Throws invalid_config when unreadable.
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

} // namespace sweepdyn::detail
