#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cgap/error.hpp"

namespace cgap {

// One manifest.json per command run, written next to the command's outputs.
// Wall clock aside, reruns with identical arguments produce identical
// artifacts; the manifest records what produced them.
struct RunManifest {
    std::string command;
    nlohmann::json resolved_config;
    std::string dataset_hash;
    uint64_t seed = 0;
    std::vector<std::string> outputs;
    double wall_clock_ms = 0.0;
};

inline void write_manifest(const std::filesystem::path& directory, const RunManifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["config"] = m.resolved_config;
    j["dataset_hash"] = m.dataset_hash;
    j["seed"] = m.seed;
    j["outputs"] = m.outputs;
    j["wall_clock_ms"] = m.wall_clock_ms;

    std::filesystem::create_directories(directory);
    std::filesystem::path final_path = directory / "manifest.json";
    std::filesystem::path tmp_path = directory / "manifest.json.tmp";
    {
        std::ofstream out(tmp_path);
        if (!out) throw error("cannot write manifest: " + tmp_path.string());
        out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp_path, final_path);
}

class WallClock {
  public:
    WallClock() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace cgap
