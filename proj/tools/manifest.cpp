#include "manifest.hpp"

#include <array>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "hardi/errors.hpp"

namespace hardi::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 initialisation failed");
  }
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

RunManifest::RunManifest(std::string subcommand)
    : subcommand_(std::move(subcommand)), start_(std::chrono::steady_clock::now()) {}

void RunManifest::input(const std::filesystem::path& path) { inputs_.push_back(path); }
void RunManifest::output(const std::filesystem::path& path) { outputs_.push_back(path); }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& p : inputs_) inputs.push_back(p.string());
  nlohmann::json outputs = nlohmann::json::array();
  nlohmann::json checksums = nlohmann::json::object();
  for (const auto& p : outputs_) {
    outputs.push_back(p.string());
    checksums[p.filename().string()] = sha256_file(p);
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  return {{"subcommand", subcommand_}, {"parameters", parameters_}, {"inputs", inputs},
          {"outputs", outputs},        {"sha256", checksums},       {"wall_seconds", wall}};
}

std::filesystem::path RunManifest::write(const std::filesystem::path& primary) const {
  std::filesystem::path path = primary;
  path += ".manifest.json";
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
  return path;
}

}  // namespace hardi::cli
