#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hardi::cli {

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// Collects the parameters, inputs and outputs of one subcommand run and
// writes them next to the primary output as `<primary>.manifest.json`.
class RunManifest {
 public:
  explicit RunManifest(std::string subcommand);

  nlohmann::json& parameters() { return parameters_; }
  void input(const std::filesystem::path& path);
  void output(const std::filesystem::path& path);
  void set_seed(std::uint64_t seed) { parameters_["seed"] = seed; }

  nlohmann::json to_json() const;
  // Checksums every output; the manifest sits beside `primary`.
  std::filesystem::path write(const std::filesystem::path& primary) const;

 private:
  std::string subcommand_;
  nlohmann::json parameters_ = nlohmann::json::object();
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace hardi::cli
