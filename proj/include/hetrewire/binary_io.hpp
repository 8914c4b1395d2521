#pragma once

// Little-endian-host binary dumps used by checkpoints and caches.

#include "common.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace hetrewire::binary {

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : path_(path) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw io_error("cannot write " + path.string());
    }

    template <typename T>
        requires std::is_trivially_copyable_v<T>
    Writer& pod(const T& v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
        return *this;
    }

    Writer& bytes(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
        return *this;
    }

    Writer& string(const std::string& s) {
        pod(static_cast<std::uint64_t>(s.size()));
        return bytes(s.data(), s.size());
    }

    Writer& matrix(const Matrix& m) {
        pod(static_cast<std::int64_t>(m.rows())).pod(static_cast<std::int64_t>(m.cols()));
        return bytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
    }

    template <typename T>
    Writer& vector(const std::vector<T>& v) {
        pod(static_cast<std::uint64_t>(v.size()));
        return bytes(v.data(), sizeof(T) * v.size());
    }

    void close() {
        out_.close();
        if (!out_) throw io_error("failed writing " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path) {
        if (!std::filesystem::exists(path)) throw missing_file_error("missing file: " + path.string());
        in_.open(path, std::ios::binary);
        if (!in_) throw io_error("cannot open " + path.string());
    }

    template <typename T>
        requires std::is_trivially_copyable_v<T>
    T pod() {
        T v{};
        read(&v, sizeof(T));
        return v;
    }

    std::string string() {
        const auto n = pod<std::uint64_t>();
        check_size(n);
        std::string s(n, '\0');
        read(s.data(), n);
        return s;
    }

    Matrix matrix() {
        const auto rows = pod<std::int64_t>();
        const auto cols = pod<std::int64_t>();
        if (rows < 0 || cols < 0) throw io_error(path_.string() + ": corrupt matrix header");
        check_size(static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) * sizeof(double));
        Matrix m(rows, cols);
        read(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
        return m;
    }

    template <typename T>
    std::vector<T> vector() {
        const auto n = pod<std::uint64_t>();
        check_size(n * sizeof(T));
        std::vector<T> v(n);
        read(v.data(), sizeof(T) * n);
        return v;
    }

private:
    void read(void* dst, std::size_t n) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (!in_) throw io_error(path_.string() + ": truncated file");
    }

    void check_size(std::uint64_t n) {
        if (n > (std::uint64_t{1} << 40)) throw io_error(path_.string() + ": corrupt length field");
    }

    std::filesystem::path path_;
    std::ifstream in_;
};

}  // namespace hetrewire::binary
