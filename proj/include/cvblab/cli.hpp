#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cvb::cli {

inline constexpr const char *kToolName = "cvb-lab";
inline constexpr const char *kVersion = "0.1.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitCapacity = 3;

// "lo:hi:log[:n]", "lo:hi:lin[:n]" (n defaults to 25) or a comma-separated list.
std::vector<double> parse_grid(std::string_view spec);
// Comma-separated numbers.
std::vector<double> parse_list(std::string_view spec);

// FNV-1a over the compact dump of `j` (keys are sorted by nlohmann::json).
std::uint64_t config_hash(const nlohmann::json &j);
std::string hex64(std::uint64_t v);

// Writes via a sibling temporary file and a rename.
void write_atomic(const std::filesystem::path &path, const std::string &content);

struct Diagnostic {
    std::string field;
    std::string message;
};

struct ValidationReport {
    bool parsed = true;
    std::size_t line = 0;
    std::size_t column = 0;
    std::string parse_message;
    std::vector<Diagnostic> diagnostics;

    bool valid() const { return parsed && diagnostics.empty(); }
    nlohmann::json to_json() const;
};

// Config documents: {"command": str, "seed": u64, "output_dir": str, "parameters": {...}}.
ValidationReport validate_config_text(const std::string &text);
ValidationReport validate_config(const std::filesystem::path &path);

// Names of the runnable commands.
std::vector<std::string> command_names();

// Entry point; returns the process exit status.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace cvb::cli
