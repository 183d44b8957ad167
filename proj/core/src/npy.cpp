#include "salent/npy.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace salent {

namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("npy: " + what);
}

// The header dict is "{'descr': ..., 'fortran_order': ..., 'shape': ..., }".
// We scan for each key and read its literal value; layout beyond that is
// not assumed.
std::string dict_value(const std::string& dict, const std::string& key) {
  const std::string quoted = "'" + key + "'";
  size_t pos = dict.find(quoted);
  if (pos == std::string::npos) fail("header missing field '" + key + "'");
  pos = dict.find(':', pos + quoted.size());
  if (pos == std::string::npos) fail("header field '" + key + "' has no value");
  ++pos;
  while (pos < dict.size() && std::isspace(static_cast<unsigned char>(dict[pos]))) ++pos;
  if (pos >= dict.size()) fail("header field '" + key + "' has no value");

  if (dict[pos] == '\'') {  // quoted string
    size_t end = dict.find('\'', pos + 1);
    if (end == std::string::npos) fail("unterminated string in field '" + key + "'");
    return dict.substr(pos + 1, end - pos - 1);
  }
  if (dict[pos] == '(') {  // tuple
    size_t end = dict.find(')', pos);
    if (end == std::string::npos) fail("unterminated tuple in field '" + key + "'");
    return dict.substr(pos, end - pos + 1);
  }
  size_t end = pos;
  while (end < dict.size() && dict[end] != ',' && dict[end] != '}') ++end;
  std::string value = dict.substr(pos, end - pos);
  while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back()))) {
    value.pop_back();
  }
  return value;
}

std::vector<int64_t> parse_shape_tuple(const std::string& tuple) {
  std::vector<int64_t> shape;
  std::string inner = tuple.substr(1, tuple.size() - 2);  // strip parens
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string trimmed;
    for (char c : item) {
      if (!std::isspace(static_cast<unsigned char>(c))) trimmed += c;
    }
    if (trimmed.empty()) continue;  // trailing comma of 1-tuples
    size_t used = 0;
    long long v = std::stoll(trimmed, &used);
    if (used != trimmed.size()) fail("malformed shape entry '" + trimmed + "'");
    shape.push_back(v);
  }
  if (shape.empty()) fail("shape: zero-dimensional tensors are unsupported");
  if (shape.size() > 4) fail("shape: more than 4 dimensions");
  for (int64_t d : shape) {
    if (d < 1) fail("shape: every dim must be >= 1");
  }
  return shape;
}

std::string shape_repr(const std::vector<int64_t>& shape) {
  std::string out = "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  if (shape.size() == 1) out += ",";
  out += ")";
  return out;
}

}  // namespace

Tensor read_npy(std::span<const uint8_t> bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 6) != 0) {
    fail("bad magic, expected \\x93NUMPY");
  }
  if (bytes[6] != 1 || bytes[7] != 0) {
    fail("version: only 1.0 is supported, got " + std::to_string(bytes[6]) +
         "." + std::to_string(bytes[7]));
  }
  const size_t header_len = bytes[8] | (static_cast<size_t>(bytes[9]) << 8);
  if (10 + header_len > bytes.size()) fail("truncated header");
  const std::string dict(reinterpret_cast<const char*>(bytes.data()) + 10, header_len);

  const std::string descr = dict_value(dict, "descr");
  const std::string order = dict_value(dict, "fortran_order");
  const std::vector<int64_t> shape = parse_shape_tuple(dict_value(dict, "shape"));

  if (order == "True") fail("fortran_order: Fortran layout is unsupported");
  if (order != "False") fail("fortran_order: unrecognized value '" + order + "'");
  if (descr != "<f4" && descr != "<f8") {
    fail("descr: unsupported dtype '" + descr + "', expected <f4 or <f8");
  }
  const size_t item = descr == "<f4" ? 4 : 8;

  int64_t count = 1;
  for (int64_t d : shape) count *= d;
  const size_t payload = bytes.size() - 10 - header_len;
  if (payload != static_cast<size_t>(count) * item) {
    fail("payload is " + std::to_string(payload) + " bytes, expected " +
         std::to_string(count * static_cast<int64_t>(item)));
  }

  const uint8_t* src = bytes.data() + 10 + header_len;
  std::vector<float> data(static_cast<size_t>(count));
  if (item == 4) {
    std::memcpy(data.data(), src, data.size() * 4);
  } else {
    for (int64_t i = 0; i < count; ++i) {
      double v;
      std::memcpy(&v, src + i * 8, 8);
      data[static_cast<size_t>(i)] = static_cast<float>(v);
    }
  }
  return Tensor(shape, std::move(data));
}

std::vector<uint8_t> write_npy(const Tensor& t) {
  std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': " +
                     shape_repr(t.shape()) + ", }";
  // Pad with spaces so the payload starts on a 64-byte boundary; the final
  // header byte is a newline.
  const size_t unpadded = 10 + dict.size() + 1;
  const size_t padding = (64 - unpadded % 64) % 64;
  dict.append(padding, ' ');
  dict += '\n';

  std::vector<uint8_t> out;
  out.reserve(10 + dict.size() + static_cast<size_t>(t.size()) * 4);
  out.insert(out.end(), kMagic, kMagic + 6);
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<uint8_t>(dict.size() & 0xff));
  out.push_back(static_cast<uint8_t>(dict.size() >> 8));
  out.insert(out.end(), dict.begin(), dict.end());

  const size_t start = out.size();
  out.resize(start + static_cast<size_t>(t.size()) * 4);
  std::memcpy(out.data() + start, t.data(), static_cast<size_t>(t.size()) * 4);
  return out;
}

Tensor load_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return read_npy(bytes);
}

void save_npy(const std::filesystem::path& path, const Tensor& t) {
  const std::vector<uint8_t> bytes = write_npy(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail("short write to " + path.string());
}

}  // namespace salent
