// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/array_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "react/errors.hpp"

namespace react {

namespace {

constexpr char kMagic[8] = {'R', 'C', 'T', 'A', 'R', 'R', 'A', 'Y'};

static_assert(std::endian::native == std::endian::little, "array container assumes a little-endian host");

template <typename T>
void put_raw(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_raw(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("array container truncated");
  return v;
}

}  // namespace

void ArrayContainer::put(const std::string& name, const Tensor& t, DType dtype) {
  put(NamedArray{name, dtype, t.shape(), t.to_vector()});
}

void ArrayContainer::put(NamedArray array) {
  if (shape_numel(array.shape) != array.values.size())
    throw DimensionError("array '" + array.name + "' shape " + shape_str(array.shape) + " does not match its data");
  auto it = index_.find(array.name);
  if (it != index_.end()) {
    arrays_[it->second] = std::move(array);
    return;
  }
  index_[array.name] = arrays_.size();
  arrays_.push_back(std::move(array));
}

bool ArrayContainer::contains(const std::string& name) const { return index_.count(name) > 0; }

const NamedArray& ArrayContainer::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw DataError("array container has no entry '" + name + "'");
  return arrays_[it->second];
}

Tensor ArrayContainer::tensor(const std::string& name) const {
  const NamedArray& a = get(name);
  return Tensor::from(a.shape, a.values);
}

void ArrayContainer::write(std::ostream& os) const {
  os.write(kMagic, sizeof(kMagic));
  put_raw<std::uint32_t>(os, kVersion);
  put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(arrays_.size()));
  for (const NamedArray& a : arrays_) {
    put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(a.name.size()));
    os.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    put_raw<std::uint8_t>(os, static_cast<std::uint8_t>(a.dtype));
    put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(a.shape.size()));
    for (std::size_t d : a.shape) put_raw<std::uint64_t>(os, d);
    for (double v : a.values) {
      switch (a.dtype) {
        case DType::f32: put_raw<float>(os, static_cast<float>(v)); break;
        case DType::f64: put_raw<double>(os, v); break;
        case DType::i64: put_raw<std::int64_t>(os, static_cast<std::int64_t>(v)); break;
      }
    }
  }
  if (!os) throw DataError("failed writing array container");
}

ArrayContainer ArrayContainer::read(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(magic)) != 0) throw DataError("not an array container (bad magic)");
  const auto version = get_raw<std::uint32_t>(is);
  if (version != kVersion) throw DataError("unsupported array container version " + std::to_string(version));
  const auto count = get_raw<std::uint32_t>(is);
  ArrayContainer c;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name.resize(get_raw<std::uint32_t>(is));
    is.read(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    const auto tag = get_raw<std::uint8_t>(is);
    if (tag < 1 || tag > 3) throw DataError("array '" + a.name + "' has unknown dtype tag " + std::to_string(tag));
    a.dtype = static_cast<DType>(tag);
    const auto rank = get_raw<std::uint32_t>(is);
    for (std::uint32_t r = 0; r < rank; ++r) a.shape.push_back(static_cast<std::size_t>(get_raw<std::uint64_t>(is)));
    a.values.resize(shape_numel(a.shape));
    for (double& v : a.values) {
      switch (a.dtype) {
        case DType::f32: v = get_raw<float>(is); break;
        case DType::f64: v = get_raw<double>(is); break;
        case DType::i64: v = static_cast<double>(get_raw<std::int64_t>(is)); break;
      }
    }
    c.put(std::move(a));
  }
  return c;
}

void ArrayContainer::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  write(os);
}

ArrayContainer ArrayContainer::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open '" + path + "'");
  return read(is);
}

}  // namespace react
