#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace dosesens {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a over the raw file bytes, hex encoded.
std::string file_hash(const std::string& path);

/// Run manifest embedded in every report; reruns with equal manifests
/// (timestamp aside) produce byte-identical numeric payloads.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             const std::string& input_path, std::uint64_t seed);

/// Writes JSON (or preformatted CSV text) to path, or stdout when path is
/// empty. Throws Error(IoError) when the destination is not writable.
void emit_report(const nlohmann::json& report, const std::string& path);
void emit_text(const std::string& text, const std::string& path);

}  // namespace dosesens
