#include "sonovis/core/hash.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "sonovis/core/error.hpp"

namespace sonovis {

std::string git_blob_sha1(const std::string& content) {
    std::string blob = "blob " + std::to_string(content.size());
    blob.push_back('\0');
    blob += content;

    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    require(EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) == 1,
            ErrorCode::Runtime, "sha1 digest failed");

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string git_blob_sha1_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::MissingInput, "cannot open for hashing: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return git_blob_sha1(buf.str());
}

}  // namespace sonovis
