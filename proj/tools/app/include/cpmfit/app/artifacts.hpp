#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cpmfit::app {

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

// Collects (file name, content) pairs and commits them together once every
// computation has finished.
class ArtifactSet {
public:
    void add(std::string name, std::string content);
    // Creates `dir` if needed. Returns the written paths in insertion order.
    std::vector<std::filesystem::path> commit(const std::filesystem::path& dir) const;

    const std::vector<std::pair<std::string, std::string>>& files() const noexcept { return files_; }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace cpmfit::app
