#include "dosesens/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dosesens/error.hpp"

namespace dosesens {

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             const std::string& input_path, std::uint64_t seed) {
    nlohmann::json m;
    m["command"] = command;
    m["config"] = config;
    m["tool_version"] = kToolVersion;
    m["seed"] = seed;
    if (!input_path.empty()) {
        m["input"] = input_path;
        m["input_hash"] = file_hash(input_path);
    }
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    m["timestamp"] = ts;
    return m;
}

void emit_text(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

void emit_report(const nlohmann::json& report, const std::string& path) {
    emit_text(report.dump(2), path);
}

}  // namespace dosesens
