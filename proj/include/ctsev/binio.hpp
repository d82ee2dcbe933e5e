#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "ctsev/errors.hpp"

namespace ctsev {

/// Little-endian append-only byte buffer.
class BinaryWriter {
public:
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void i32(std::int32_t v) { raw(&v, 4); }
    void f64(double v) { raw(&v, 8); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }

    const std::vector<unsigned char>& buffer() const { return buf_; }

private:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }

    std::vector<unsigned char> buf_;
};

/// Bounds-checked reader over a byte range.
class BinaryReader {
public:
    BinaryReader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

    std::uint8_t u8() { return take<std::uint8_t>(); }
    std::uint32_t u32() { return take<std::uint32_t>(); }
    std::uint64_t u64() { return take<std::uint64_t>(); }
    std::int32_t i32() { return take<std::int32_t>(); }
    double f64() { return take<double>(); }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }

    bool at_end() const { return pos_ == size_; }

private:
    template <typename T>
    T take() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, data_ + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    void need(std::size_t n) const {
        if (size_ - pos_ < n) throw DataError("corrupt model file: truncated field");
    }

    const unsigned char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

} // namespace ctsev
