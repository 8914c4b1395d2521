#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace hetrewire {

using node_id = std::uint32_t;

// Row-major so that node rows are contiguous spans.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Boolean per-node mask; `std::vector<char>` keeps elements addressable.
using NodeMask = std::vector<char>;

// ---------------------------------------------------------------------------
// Errors. Each failure family is its own type so callers (and the CLI exit
// code mapping) can tell them apart.
// ---------------------------------------------------------------------------

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class validation_error : public error {
public:
    using error::error;
};

class io_error : public error {
public:
    using error::error;
};

class missing_file_error : public io_error {
public:
    using io_error::io_error;
};

class ragged_features_error : public validation_error {
public:
    using validation_error::validation_error;
};

class label_range_error : public validation_error {
public:
    using validation_error::validation_error;
};

class node_range_error : public validation_error {
public:
    using validation_error::validation_error;
};

class stale_embeddings_error : public validation_error {
public:
    using validation_error::validation_error;
};

class divergence_error : public error {
public:
    using error::error;
};

// ---------------------------------------------------------------------------
// 64-bit FNV-1a content hash, used to key caches, checkpoints and run logs.
// ---------------------------------------------------------------------------

class ContentHash {
public:
    ContentHash& update(const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= bytes[i];
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }

    template <typename T>
        requires std::is_trivially_copyable_v<T>
    ContentHash& update(const T& value) {
        return update(&value, sizeof(T));
    }

    template <typename T>
        requires std::is_trivially_copyable_v<T>
    ContentHash& update_range(std::span<const T> values) {
        const std::uint64_t n = values.size();
        update(n);
        return update(values.data(), values.size_bytes());
    }

    ContentHash& update(std::string_view s) {
        const std::uint64_t n = s.size();
        update(n);
        return update(s.data(), s.size());
    }

    std::uint64_t value() const noexcept { return state_; }

    std::string hex() const { return to_hex(state_); }

    static std::string to_hex(std::uint64_t v) {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out(16, '0');
        for (int i = 15; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = digits[v & 0xf];
            v >>= 4;
        }
        return out;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::span<const double> row_span(const Matrix& m, Eigen::Index r) {
    return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace hetrewire
