#include "matsplat/io/ply.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "matsplat/error.hpp"

namespace matsplat::ply {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

namespace {

std::optional<Type> parse_type(const std::string& s) {
  if (s == "char" || s == "int8") return Type::Int8;
  if (s == "uchar" || s == "uint8") return Type::UInt8;
  if (s == "short" || s == "int16") return Type::Int16;
  if (s == "ushort" || s == "uint16") return Type::UInt16;
  if (s == "int" || s == "int32") return Type::Int32;
  if (s == "uint" || s == "uint32") return Type::UInt32;
  if (s == "float" || s == "float32") return Type::Float32;
  if (s == "double" || s == "float64") return Type::Float64;
  return std::nullopt;
}

const char* type_name(Type t) {
  switch (t) {
    case Type::Int8: return "char";
    case Type::UInt8: return "uchar";
    case Type::Int16: return "short";
    case Type::UInt16: return "ushort";
    case Type::Int32: return "int";
    case Type::UInt32: return "uint";
    case Type::Float32: return "float";
    case Type::Float64: return "double";
  }
  return "float";
}

std::size_t type_size(Type t) {
  switch (t) {
    case Type::Int8:
    case Type::UInt8: return 1;
    case Type::Int16:
    case Type::UInt16: return 2;
    case Type::Int32:
    case Type::UInt32:
    case Type::Float32: return 4;
    case Type::Float64: return 8;
  }
  return 4;
}

template <typename T>
T load_as(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

double decode(Type t, const char* p) {
  switch (t) {
    case Type::Int8: return load_as<std::int8_t>(p);
    case Type::UInt8: return load_as<std::uint8_t>(p);
    case Type::Int16: return load_as<std::int16_t>(p);
    case Type::UInt16: return load_as<std::uint16_t>(p);
    case Type::Int32: return load_as<std::int32_t>(p);
    case Type::UInt32: return load_as<std::uint32_t>(p);
    case Type::Float32: return load_as<float>(p);
    case Type::Float64: return load_as<double>(p);
  }
  return 0;
}

template <typename T>
void store_as(std::string& out, double v) {
  const T x = static_cast<T>(v);
  char buf[sizeof(T)];
  std::memcpy(buf, &x, sizeof(T));
  out.append(buf, sizeof(T));
}

void encode(Type t, double v, std::string& out) {
  switch (t) {
    case Type::Int8: store_as<std::int8_t>(out, v); break;
    case Type::UInt8: store_as<std::uint8_t>(out, v); break;
    case Type::Int16: store_as<std::int16_t>(out, v); break;
    case Type::UInt16: store_as<std::uint16_t>(out, v); break;
    case Type::Int32: store_as<std::int32_t>(out, v); break;
    case Type::UInt32: store_as<std::uint32_t>(out, v); break;
    case Type::Float32: store_as<float>(out, v); break;
    case Type::Float64: store_as<double>(out, v); break;
  }
}

void format_ascii(Type t, double v, std::string& out) {
  char buf[40];
  int n = 0;
  switch (t) {
    case Type::Float32: n = std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(v))); break;
    case Type::Float64: n = std::snprintf(buf, sizeof buf, "%.17g", v); break;
    default: n = std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v)); break;
  }
  out.append(buf, static_cast<std::size_t>(n));
}

bool is_integral(Type t) { return t != Type::Float32 && t != Type::Float64; }

[[noreturn]] void format_error(const std::filesystem::path& path, const std::string& what) {
  fail(ErrorKind::Format, path.string() + ": " + what);
}

}  // namespace

std::optional<std::size_t> Element::find(std::string_view property) const {
  for (std::size_t i = 0; i < properties.size(); ++i)
    if (properties[i].name == property) return i;
  return std::nullopt;
}

const std::vector<double>& Element::column(std::string_view property) const {
  const auto i = find(property);
  if (!i || properties[*i].is_list)
    fail(ErrorKind::Format, "element '" + name + "' has no scalar property '" + std::string(property) + "'");
  return columns[*i];
}

const std::vector<std::vector<double>>& Element::list(std::string_view property) const {
  const auto i = find(property);
  if (!i || !properties[*i].is_list)
    fail(ErrorKind::Format, "element '" + name + "' has no list property '" + std::string(property) + "'");
  return lists[*i];
}

void Element::add_scalar(std::string prop_name, Type type, std::vector<double> values) {
  properties.push_back({std::move(prop_name), type, false, Type::UInt8});
  columns.push_back(std::move(values));
  lists.emplace_back();
}

void Element::add_list(std::string prop_name, Type count_type, Type type,
                       std::vector<std::vector<double>> rows) {
  properties.push_back({std::move(prop_name), type, true, count_type});
  columns.emplace_back();
  lists.push_back(std::move(rows));
}

const Element* Data::find(std::string_view element) const {
  for (const auto& e : elements)
    if (e.name == element) return &e;
  return nullptr;
}

Data read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());

  Data data;
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) format_error(path, "missing 'ply' magic");
  bool have_format = false;
  while (true) {
    if (!std::getline(in, line)) format_error(path, "header is not terminated by end_header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword.empty()) continue;
    if (keyword == "end_header") break;
    if (keyword == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii") data.encoding = Encoding::Ascii;
      else if (fmt == "binary_little_endian") data.encoding = Encoding::BinaryLittleEndian;
      else format_error(path, "unsupported PLY encoding '" + fmt + "'");
      have_format = true;
    } else if (keyword == "comment" || keyword == "obj_info") {
      const auto pos = line.find(keyword) + keyword.size();
      data.comments.push_back(pos < line.size() ? line.substr(pos + 1) : std::string());
    } else if (keyword == "element") {
      Element e;
      long long count = -1;
      ls >> e.name >> count;
      if (e.name.empty() || count < 0) format_error(path, "bad element line '" + line + "'");
      e.count = static_cast<std::size_t>(count);
      data.elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (data.elements.empty()) format_error(path, "property before any element");
      Element& e = data.elements.back();
      std::string t1;
      ls >> t1;
      Property p;
      if (t1 == "list") {
        std::string ct, vt;
        ls >> ct >> vt >> p.name;
        const auto c = parse_type(ct);
        const auto v = parse_type(vt);
        if (!c || !v || !is_integral(*c)) format_error(path, "bad list property '" + line + "'");
        p.is_list = true;
        p.count_type = *c;
        p.type = *v;
      } else {
        const auto t = parse_type(t1);
        if (!t) format_error(path, "unknown property type '" + t1 + "'");
        p.type = *t;
        ls >> p.name;
      }
      if (p.name.empty()) format_error(path, "property without a name");
      e.properties.push_back(p);
    } else {
      format_error(path, "unexpected header keyword '" + keyword + "'");
    }
  }
  if (!have_format) format_error(path, "missing format line");

  for (auto& e : data.elements) {
    e.columns.assign(e.properties.size(), {});
    e.lists.assign(e.properties.size(), {});
    for (std::size_t p = 0; p < e.properties.size(); ++p) {
      if (e.properties[p].is_list) e.lists[p].resize(e.count);
      else e.columns[p].resize(e.count);
    }
  }

  if (data.encoding == Encoding::Ascii) {
    for (auto& e : data.elements) {
      for (std::size_t row = 0; row < e.count; ++row) {
        if (!std::getline(in, line)) format_error(path, "unexpected end of data in element '" + e.name + "'");
        const char* p = line.data();
        const char* end = line.data() + line.size();
        auto next = [&](std::size_t prop, Type t) -> double {
          while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
          double v = 0;
          const auto res = std::from_chars(p, end, v);
          if (res.ec != std::errc())
            format_error(path, "cannot parse value for '" + e.properties[prop].name + "' in element '" +
                                   e.name + "' row " + std::to_string(row));
          p = res.ptr;
          return t == Type::Float32 ? static_cast<double>(static_cast<float>(v)) : v;
        };
        for (std::size_t prop = 0; prop < e.properties.size(); ++prop) {
          if (e.properties[prop].is_list) {
            const double n = next(prop, e.properties[prop].count_type);
            if (n < 0) format_error(path, "negative list length");
            auto& row_list = e.lists[prop][row];
            row_list.resize(static_cast<std::size_t>(n));
            for (auto& v : row_list) v = next(prop, e.properties[prop].type);
          } else {
            e.columns[prop][row] = next(prop, e.properties[prop].type);
          }
        }
      }
    }
  } else {
    const auto start = in.tellg();
    in.seekg(0, std::ios::end);
    const auto end = in.tellg();
    in.seekg(start);
    std::string blob(static_cast<std::size_t>(end - start), '\0');
    in.read(blob.data(), static_cast<std::streamsize>(blob.size()));
    std::size_t off = 0;
    auto take = [&](Type t, const std::string& ename) -> double {
      const std::size_t sz = type_size(t);
      if (off + sz > blob.size()) format_error(path, "truncated binary data in element '" + ename + "'");
      const double v = decode(t, blob.data() + off);
      off += sz;
      return v;
    };
    for (auto& e : data.elements) {
      for (std::size_t row = 0; row < e.count; ++row) {
        for (std::size_t prop = 0; prop < e.properties.size(); ++prop) {
          const Property& pr = e.properties[prop];
          if (pr.is_list) {
            const double n = take(pr.count_type, e.name);
            if (n < 0) format_error(path, "negative list length");
            auto& row_list = e.lists[prop][row];
            row_list.resize(static_cast<std::size_t>(n));
            for (auto& v : row_list) v = take(pr.type, e.name);
          } else {
            e.columns[prop][row] = take(pr.type, e.name);
          }
        }
      }
    }
  }
  return data;
}

void write(const Data& data, const std::filesystem::path& path) {
  std::string out;
  out += "ply\n";
  out += data.encoding == Encoding::Ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
  for (const auto& c : data.comments) out += "comment " + c + "\n";
  for (const auto& e : data.elements) {
    out += "element " + e.name + " " + std::to_string(e.count) + "\n";
    for (const auto& p : e.properties) {
      if (p.is_list)
        out += std::string("property list ") + type_name(p.count_type) + " " + type_name(p.type) + " " + p.name + "\n";
      else
        out += std::string("property ") + type_name(p.type) + " " + p.name + "\n";
    }
  }
  out += "end_header\n";

  for (const auto& e : data.elements) {
    for (std::size_t prop = 0; prop < e.properties.size(); ++prop) {
      const bool ok = e.properties[prop].is_list ? e.lists[prop].size() == e.count
                                                 : e.columns[prop].size() == e.count;
      if (!ok) fail(ErrorKind::Internal, "PLY element '" + e.name + "' property '" +
                                             e.properties[prop].name + "' has the wrong length");
    }
    for (std::size_t row = 0; row < e.count; ++row) {
      for (std::size_t prop = 0; prop < e.properties.size(); ++prop) {
        const Property& pr = e.properties[prop];
        if (data.encoding == Encoding::Ascii) {
          if (prop > 0) out += ' ';
          if (pr.is_list) {
            const auto& l = e.lists[prop][row];
            format_ascii(pr.count_type, static_cast<double>(l.size()), out);
            for (double v : l) {
              out += ' ';
              format_ascii(pr.type, v, out);
            }
          } else {
            format_ascii(pr.type, e.columns[prop][row], out);
          }
        } else if (pr.is_list) {
          const auto& l = e.lists[prop][row];
          encode(pr.count_type, static_cast<double>(l.size()), out);
          for (double v : l) encode(pr.type, v, out);
        } else {
          encode(pr.type, e.columns[prop][row], out);
        }
      }
      if (data.encoding == Encoding::Ascii) out += '\n';
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorKind::Io, "failed writing " + path.string());
}

}  // namespace matsplat::ply
