#include "ptq/npy.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <vector>

#include "ptq/error.hpp"
#include "ptq/fs_util.hpp"

namespace ptq {
namespace {

constexpr std::string_view kMagic{"\x93NUMPY", 6};
constexpr std::size_t kPreambleSize = 10;  // magic + version + u16 length
constexpr std::size_t kAlignment = 64;

// Minimal reader for the Python literal dict that NPY headers carry.
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  struct Fields {
    std::optional<std::string> descr;
    std::optional<bool> fortran_order;
    std::optional<std::vector<std::size_t>> shape;
  };

  Fields parse() {
    Fields fields;
    skip_ws();
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      std::string key = parse_string();
      skip_ws();
      expect(':');
      skip_ws();
      if (key == "descr") {
        fields.descr = parse_string();
      } else if (key == "fortran_order") {
        fields.fortran_order = parse_bool();
      } else if (key == "shape") {
        fields.shape = parse_tuple();
      } else {
        fail("unexpected key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        fail("expected ',' or '}'");
      }
    }
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after dict");
    if (!fields.descr || !fields.fortran_order || !fields.shape) {
      fail("missing one of descr/fortran_order/shape");
    }
    return fields;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(Errc::MalformedHeader, msg + " at offset " + std::to_string(pos_));
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string parse_string() {
    char quote = peek();
    if (quote != '\'' && quote != '"') fail("expected string");
    ++pos_;
    auto end = text_.find(quote, pos_);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  bool parse_bool() {
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    fail("expected True or False");
  }

  std::vector<std::size_t> parse_tuple() {
    expect('(');
    std::vector<std::size_t> dims;
    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected dimension");
      std::size_t value = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        value = value * 10 + static_cast<std::size_t>(peek() - '0');
        ++pos_;
      }
      dims.push_back(value);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ')') {
        fail("expected ',' or ')' in shape");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string shape_literal(const std::vector<std::size_t>& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  if (shape.size() == 1) out += ",";
  out += ")";
  return out;
}

}  // namespace

Tensor decode_npy(std::string_view bytes) {
  if (bytes.size() < kPreambleSize || bytes.substr(0, 6) != kMagic) {
    throw Error(Errc::MalformedHeader, "bad magic");
  }
  auto major = static_cast<std::uint8_t>(bytes[6]);
  auto minor = static_cast<std::uint8_t>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw Error(Errc::MalformedHeader, "unsupported version " + std::to_string(major) + "." +
                                           std::to_string(minor));
  }
  std::size_t header_len = static_cast<std::uint8_t>(bytes[8]) |
                           (static_cast<std::size_t>(static_cast<std::uint8_t>(bytes[9])) << 8);
  if (bytes.size() < kPreambleSize + header_len) {
    throw Error(Errc::MalformedHeader, "header length exceeds file size");
  }
  auto fields = HeaderParser(bytes.substr(kPreambleSize, header_len)).parse();

  std::size_t item_size = 0;
  Precision precision{};
  if (*fields.descr == "<f4") {
    item_size = 4;
    precision = Precision::F32;
  } else if (*fields.descr == "<f8") {
    item_size = 8;
    precision = Precision::F64;
  } else {
    throw Error(Errc::UnsupportedDtype, "descr '" + *fields.descr + "'");
  }
  if (*fields.fortran_order) {
    throw Error(Errc::FortranOrderUnsupported, "fortran_order is True");
  }

  const auto& shape = *fields.shape;
  std::size_t count = shape_product(shape);
  std::string_view payload = bytes.substr(kPreambleSize + header_len);
  if (payload.size() < count * item_size) {
    throw Error(Errc::TruncatedPayload, "need " + std::to_string(count * item_size) +
                                            " bytes, have " + std::to_string(payload.size()));
  }

  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (item_size == 4) {
      float v;
      std::memcpy(&v, payload.data() + i * 4, 4);
      data[i] = v;
    } else {
      std::memcpy(&data[i], payload.data() + i * 8, 8);
    }
    if (!std::isfinite(data[i])) {
      throw Error(Errc::NonFiniteValue, "element " + std::to_string(i));
    }
  }
  return Tensor(shape, std::move(data), precision);
}

Tensor load_npy(const std::filesystem::path& path) {
  return decode_npy(read_file(path));
}

std::string encode_npy(const Tensor& tensor, Precision precision) {
  std::string dict = "{'descr': '";
  dict += precision == Precision::F32 ? "<f4" : "<f8";
  dict += "', 'fortran_order': False, 'shape': " + shape_literal(tensor.shape()) + ", }";

  std::size_t unpadded = kPreambleSize + dict.size() + 1;
  std::size_t padded = (unpadded + kAlignment - 1) / kAlignment * kAlignment;
  std::size_t header_len = padded - kPreambleSize;
  dict.append(padded - unpadded, ' ');
  dict += '\n';

  std::size_t item_size = precision == Precision::F32 ? 4 : 8;
  std::string out;
  out.reserve(padded + tensor.size() * item_size);
  out.append(kMagic);
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(header_len & 0xff));
  out.push_back(static_cast<char>((header_len >> 8) & 0xff));
  out += dict;

  char buf[8];
  for (double v : tensor.data()) {
    if (precision == Precision::F32) {
      auto f = static_cast<float>(v);
      std::memcpy(buf, &f, 4);
      out.append(buf, 4);
    } else {
      std::memcpy(buf, &v, 8);
      out.append(buf, 8);
    }
  }
  return out;
}

void save_npy(const Tensor& tensor, const std::filesystem::path& path, Precision precision) {
  write_file_atomic(path, encode_npy(tensor, precision));
}

}  // namespace ptq
