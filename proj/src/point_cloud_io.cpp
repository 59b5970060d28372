#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "matsplat/error.hpp"
#include "matsplat/lidar.hpp"

namespace matsplat::lidar {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCsvHeader = "x,y,z,range,reflectivity,class_id,revolution,channel,azimuth";

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

void write_all(const std::string& bytes, const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

void write_returns_csv(const std::vector<LidarReturn>& returns, const fs::path& path) {
  std::string out = std::string(kCsvHeader) + "\n";
  char buf[256];
  for (const auto& r : returns) {
    const int n = std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%u,%u,%u,%u,%u\n",
                                double(float(r.point.x())), double(float(r.point.y())), double(float(r.point.z())),
                                double(float(r.range)), unsigned(r.reflectivity), unsigned(r.class_id),
                                unsigned(r.revolution), unsigned(r.channel), unsigned(r.azimuth));
    out.append(buf, static_cast<std::size_t>(n));
  }
  write_all(out, path);
}

void write_returns_binary(const std::vector<LidarReturn>& returns, const fs::path& path) {
  std::string out;
  out.reserve(returns.size() * kBinaryRecordSize);
  for (const auto& r : returns) {
    put(out, static_cast<float>(r.point.x()));
    put(out, static_cast<float>(r.point.y()));
    put(out, static_cast<float>(r.point.z()));
    put(out, static_cast<float>(r.range));
    put(out, r.reflectivity);
    put(out, static_cast<std::uint8_t>(r.class_id));
    put(out, r.revolution);
    put(out, r.channel);
    put(out, r.azimuth);
  }
  write_all(out, path);
}

std::vector<LidarReturn> read_returns(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<LidarReturn> out;

  if (path.extension() == ".bin") {
    if (bytes.size() % kBinaryRecordSize != 0)
      fail(ErrorKind::Format, path.string() + ": size is not a multiple of the 24-byte record");
    out.resize(bytes.size() / kBinaryRecordSize);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const char* p = bytes.data() + i * kBinaryRecordSize;
      LidarReturn& r = out[i];
      r.point = Vec3(get<float>(p), get<float>(p + 4), get<float>(p + 8));
      r.range = get<float>(p + 12);
      r.reflectivity = get<std::uint8_t>(p + 16);
      r.class_id = get<std::uint8_t>(p + 17);
      r.revolution = get<std::uint16_t>(p + 18);
      r.channel = get<std::uint16_t>(p + 20);
      r.azimuth = get<std::uint16_t>(p + 22);
      if (!r.point.allFinite()) fail(ErrorKind::Data, path.string() + ": non-finite point at record " + std::to_string(i));
    }
    return out;
  }

  std::istringstream ss(bytes);
  std::string line;
  if (!std::getline(ss, line)) return out;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Column positions come from the header; x, y, z and reflectivity are required.
  std::vector<std::string> names;
  {
    std::istringstream hs(line);
    for (std::string tok; std::getline(hs, tok, ',');) names.push_back(tok);
  }
  auto column = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int cx = column("x"), cy = column("y"), cz = column("z"), cr = column("reflectivity");
  if (cx < 0 || cy < 0 || cz < 0 || cr < 0)
    fail(ErrorKind::Format, path.string() + ": CSV header must name x, y, z and reflectivity");
  const int crange = column("range"), cclass = column("class_id"), crev = column("revolution"),
            cch = column("channel"), caz = column("azimuth");

  std::size_t lineno = 1;
  std::vector<double> values(names.size());
  while (std::getline(ss, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto res = std::from_chars(p, end, values[k]);
      if (res.ec != std::errc())
        fail(ErrorKind::Format, path.string() + ":" + std::to_string(lineno) + ": bad value in column '" + names[k] + "'");
      p = res.ptr;
      if (k + 1 < names.size()) {
        if (p >= end || *p != ',') fail(ErrorKind::Format, path.string() + ":" + std::to_string(lineno) + ": too few columns");
        ++p;
      }
    }
    LidarReturn r;
    r.point = Vec3(values[cx], values[cy], values[cz]);
    if (!r.point.allFinite()) fail(ErrorKind::Data, path.string() + ":" + std::to_string(lineno) + ": non-finite point");
    const double refl = values[cr];
    if (!(refl >= 0 && refl <= 255))
      fail(ErrorKind::Data, path.string() + ":" + std::to_string(lineno) + ": reflectivity outside [0,255]");
    r.reflectivity = static_cast<std::uint8_t>(std::lround(refl));
    if (crange >= 0) r.range = values[crange];
    if (cclass >= 0) r.class_id = static_cast<ClassId>(values[cclass]);
    if (crev >= 0) r.revolution = static_cast<std::uint16_t>(values[crev]);
    if (cch >= 0) r.channel = static_cast<std::uint16_t>(values[cch]);
    if (caz >= 0) r.azimuth = static_cast<std::uint16_t>(values[caz]);
    out.push_back(r);
  }
  return out;
}

}  // namespace matsplat::lidar
