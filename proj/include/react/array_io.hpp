// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "react/tensor.hpp"

namespace react {

enum class DType : std::uint8_t { f32 = 1, f64 = 2, i64 = 3 };

/// One entry of a named-array container. Values are held as doubles in memory;
/// the dtype tag controls the on-disk encoding.
struct NamedArray {
  std::string name;
  DType dtype = DType::f64;
  Shape shape;
  std::vector<double> values;
};

/// Ordered collection of named arrays with a binary little-endian encoding:
///
///   "RCTARRAY" | u32 version | u32 count |
///   count x { u32 name_len | name | u8 dtype | u32 rank | u64 dims[rank] | raw data }
class ArrayContainer {
 public:
  static constexpr std::uint32_t kVersion = 1;

  void put(const std::string& name, const Tensor& t, DType dtype = DType::f64);
  void put(NamedArray array);
  bool contains(const std::string& name) const;
  const NamedArray& get(const std::string& name) const;
  Tensor tensor(const std::string& name) const;
  const std::vector<NamedArray>& arrays() const { return arrays_; }

  void write(std::ostream& os) const;
  static ArrayContainer read(std::istream& is);
  void save(const std::string& path) const;
  static ArrayContainer load(const std::string& path);

 private:
  std::vector<NamedArray> arrays_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace react
