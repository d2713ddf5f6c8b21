#pragma once

#include <filesystem>
#include <string>

namespace sonovis {

// SHA-1 hex digest of a git-style blob ("blob <size>\0" + content).
std::string git_blob_sha1(const std::string& content);
std::string git_blob_sha1_file(const std::filesystem::path& path);

}  // namespace sonovis
