#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace qst::io {

inline constexpr const char* artifact_version = "1.0.0";

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out.flush()) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Provenance of an experiment run: what ran, with which resolved
/// configuration, and digests of every file it produced.
struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::string started_at;
    std::string finished_at;
    std::vector<std::pair<std::string, std::string>> outputs; // file name, sha256

    void add_output(const std::string& name, const std::string& contents) {
        outputs.emplace_back(name, sha256_hex(contents));
    }

    nlohmann::json to_json() const {
        nlohmann::json files = nlohmann::json::array();
        for (const auto& [name, digest] : outputs) {
            files.push_back({{"path", name}, {"sha256", digest}});
        }
        return {{"format", "qst.manifest"},
                {"version", 1},
                {"artifact_version", artifact_version},
                {"command", command},
                {"config", config},
                {"seed", seed},
                {"jobs", jobs},
                {"started_at", started_at},
                {"finished_at", finished_at},
                {"outputs", files}};
    }
};

} // namespace qst::io
