#include <array>
#include <cstdio>
#include <fstream>
#include <vector>

#include <openssl/evp.h>

#include "crossview/io/formats.hpp"

namespace crossview::io {

namespace {

std::string hex_of(const unsigned char* digest, unsigned int n) {
    static const char* kHex = "0123456789abcdef";
    std::string out(n * 2, '0');
    for (unsigned int i = 0; i < n; ++i) {
        out[2 * i] = kHex[digest[i] >> 4];
        out[2 * i + 1] = kHex[digest[i] & 0xF];
    }
    return out;
}

struct DigestCtx {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~DigestCtx() { EVP_MD_CTX_free(ctx); }
};

}  // namespace

std::string sha256_hex(const void* data, std::size_t size) {
    DigestCtx d;
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    if (!d.ctx || EVP_DigestInit_ex(d.ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(d.ctx, data, size) != 1 ||
        EVP_DigestFinal_ex(d.ctx, digest, &n) != 1) {
        throw IoError("sha256 digest failure");
    }
    return hex_of(digest, n);
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    DigestCtx d;
    if (!d.ctx || EVP_DigestInit_ex(d.ctx, EVP_sha256(), nullptr) != 1) {
        throw IoError("sha256 digest failure");
    }
    std::array<char, 1 << 16> buffer;
    while (in) {
        in.read(buffer.data(), buffer.size());
        std::streamsize got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(d.ctx, buffer.data(), static_cast<std::size_t>(got)) != 1) {
            throw IoError("sha256 digest failure");
        }
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    if (EVP_DigestFinal_ex(d.ctx, digest, &n) != 1) throw IoError("sha256 digest failure");
    return hex_of(digest, n);
}

}  // namespace crossview::io
