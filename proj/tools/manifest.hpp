#pragma once

// Run manifests: what was run, with which settings, and a SHA-256 for every
// file it wrote.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "lqc/errors.hpp"

#ifndef LQC_CODE_VERSION
#define LQC_CODE_VERSION "unknown"
#endif

namespace lqc::cli {

inline std::string sha256_file(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw DomainError("cannot read " + path.string() + " for checksum");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw Error("sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (is.gcount() > 0)
      EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

class RunManifest {
public:
  RunManifest(std::string subcommand, std::string command_line)
      : start_(std::chrono::steady_clock::now()) {
    doc_["subcommand"] = std::move(subcommand);
    doc_["command_line"] = std::move(command_line);
    doc_["code_version"] = LQC_CODE_VERSION;
    doc_["outputs"] = nlohmann::json::array();
  }

  void config(const std::map<std::string, std::string> &values) { doc_["config"] = values; }
  nlohmann::json &results() { return doc_["results"]; }
  void conditions(const nlohmann::json &summary) { doc_["condition_report"] = summary; }

  void add_output(const std::filesystem::path &path) { outputs_.push_back(path); }

  /// Checksums every registered output and writes manifest.json beside them.
  std::filesystem::path write(const std::filesystem::path &dir) {
    for (const auto &p : outputs_)
      doc_["outputs"].push_back({{"path", p.filename().string()},
                                 {"bytes", std::filesystem::file_size(p)},
                                 {"sha256", sha256_file(p)}});
    doc_["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const auto path = dir / "manifest.json";
    std::ofstream os(path);
    os << doc_.dump(2) << '\n';
    if (!os)
      throw Error("cannot write " + path.string());
    return path;
  }

private:
  std::chrono::steady_clock::time_point start_;
  nlohmann::json doc_;
  std::vector<std::filesystem::path> outputs_;
};

} // namespace lqc::cli
