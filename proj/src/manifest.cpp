#include "fleetagg/manifest.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

#include "json.hpp"

namespace fleetagg {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string() + " for hashing");
    }
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: digest initialization failed");
    }
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) {
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
        }
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
    std::string hex;
    char byte[3];
    for (unsigned int k = 0; k < len; ++k) {
        std::snprintf(byte, sizeof byte, "%02x", digest[k]);
        hex += byte;
    }
    return hex;
}

void RunManifest::write(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    j["inputs"] = nlohmann::json::array();
    for (const auto& p : inputs) {
        j["inputs"].push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    }
    j["outputs"] = nlohmann::json::array();
    for (const auto& p : outputs) {
        j["outputs"].push_back(p.string());
    }
    j["wall_time_seconds"] = wall_time_seconds;
    j["version"] = version;
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write manifest " + path.string());
    }
    out << j.dump(2) << '\n';
}

}  // namespace fleetagg
