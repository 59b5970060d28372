#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace matsplat::ply {

enum class Type { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

enum class Encoding { Ascii, BinaryLittleEndian };

struct Property {
  std::string name;
  Type type = Type::Float32;
  bool is_list = false;
  Type count_type = Type::UInt8;
};

/// One element block. Scalar properties are stored column-wise as doubles
/// (every PLY scalar type is exactly representable); list properties as
/// one vector per row.
struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
  std::vector<std::vector<double>> columns;
  std::vector<std::vector<std::vector<double>>> lists;

  /// Index into `properties`, or nullopt.
  std::optional<std::size_t> find(std::string_view property) const;
  const std::vector<double>& column(std::string_view property) const;
  const std::vector<std::vector<double>>& list(std::string_view property) const;

  /// Appends a scalar property with its column.
  void add_scalar(std::string prop_name, Type type, std::vector<double> values);
  void add_list(std::string prop_name, Type count_type, Type type,
                std::vector<std::vector<double>> rows);
};

struct Data {
  Encoding encoding = Encoding::BinaryLittleEndian;
  std::vector<std::string> comments;
  std::vector<Element> elements;

  const Element* find(std::string_view element) const;
};

/// Reads ASCII or binary little-endian PLY. Big-endian files are rejected.
Data read(const std::filesystem::path& path);
void write(const Data& data, const std::filesystem::path& path);

}  // namespace matsplat::ply
