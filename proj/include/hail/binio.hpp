#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>

#include "hail/errors.hpp"
#include "hail/numeric.hpp"

namespace hail::binio {

static_assert(std::endian::native == std::endian::little, "on-disk formats assume a little-endian host");

/// Append-only little-endian byte buffer.
class Writer {
public:
    template <typename T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        char raw[sizeof(T)];
        std::memcpy(raw, &v, sizeof(T));
        bytes_.append(raw, sizeof(T));
    }
    void put_bytes(std::string_view s) { bytes_.append(s); }
    /// rows, cols, then entries row-major.
    void put_matrix(const Matrix& m);
    void put_vector(const Vector& v);
    const std::string& bytes() const { return bytes_; }

private:
    std::string bytes_;
};

/// Bounds-checked reader; running past the end throws FormatError("truncated").
class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string_view get_bytes(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    Matrix get_matrix();
    Vector get_vector();
    bool at_end() const { return pos_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FormatError("truncated input");
    }
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

/// Write to a sibling temporary file, then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace hail::binio
