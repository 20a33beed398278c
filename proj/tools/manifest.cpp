#include "cli.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <stdexcept>

namespace fibrebend::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::filesystem::path default_output_dir() {
  const char* env = std::getenv("FIBREBEND_OUT");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("out");
}

}  // namespace fibrebend::cli
