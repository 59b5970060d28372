#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>

#include <Eigen/Core>
#include <openssl/evp.h>
#include <openssl/opensslv.h>
#include <png.h>

#include "matsplat/app/commands.hpp"
#include "matsplat/error.hpp"

namespace matsplat::app {

namespace {

using Digest = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

void feed_file(EVP_MD_CTX* ctx, const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
}

std::string hex(const unsigned char* p, unsigned n) {
  std::string s;
  char b[3];
  for (unsigned i = 0; i < n; ++i) {
    std::snprintf(b, sizeof b, "%02x", p[i]);
    s += b;
  }
  return s;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  Digest ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) fail(ErrorKind::Internal, "SHA-256 unavailable");
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string rel = fs::relative(f, path).generic_string();
      EVP_DigestUpdate(ctx.get(), rel.data(), rel.size() + 1);
      feed_file(ctx.get(), f);
    }
  } else {
    feed_file(ctx.get(), path);
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned n = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &n);
  return hex(md, n);
}

void Provenance::input(const std::string& role, const fs::path& path) {
  inputs_[role] = {{"path", path.generic_string()}, {"sha256", sha256_file(path)}};
}

void Provenance::output(const std::string& role, const fs::path& path) {
  outputs_[role] = {{"path", path.generic_string()}, {"sha256", sha256_file(path)}};
}

nlohmann::ordered_json Provenance::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "matsplat";
  j["command"] = command_;
  j["versions"] = {
      {"matsplat", kVersion},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"libpng", PNG_LIBPNG_VER_STRING},
      {"openssl", OPENSSL_VERSION_TEXT},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                            "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
  };
  j["parameters"] = params_;
  j["inputs"] = inputs_;
  j["outputs"] = outputs_;
  return j;
}

void Provenance::write(const fs::path& primary_output) const {
  const fs::path path = primary_output.string() + ".provenance.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << to_json().dump(2) << "\n";
}

}  // namespace matsplat::app
