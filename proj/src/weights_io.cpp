// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "weights_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "util.hpp"

namespace mmphase {
namespace {

constexpr char kMagic[4] = {'M', 'M', 'P', 'W'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
  public:
    Reader(const std::vector<std::uint8_t>& buf, std::string path)
        : buf_(buf), path_(std::move(path)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
        return v;
    }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(buf_.data()) + pos_, n);
        pos_ += n;
        return s;
    }

    void doubles(double* dst, std::size_t n) {
        need(n * sizeof(double));
        std::memcpy(dst, buf_.data() + pos_, n * sizeof(double));
        pos_ += n * sizeof(double);
    }

    bool at_end() const { return pos_ == buf_.size(); }

  private:
    unsigned char byte() { return buf_[pos_++]; }

    void need(std::size_t n) {
        if (buf_.size() - pos_ < n)
            throw std::runtime_error("truncated weight file: " + path_);
    }

    const std::vector<std::uint8_t>& buf_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t NamedTensor::element_count() const {
    std::uint64_t n = 1;
    for (std::uint64_t d : dims) n *= d;
    return n;
}

void write_tensor_file(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const NamedTensor& t : tensors) {
        if (t.data.size() != t.element_count())
            throw std::runtime_error("tensor '" + t.name + "' has " + std::to_string(t.data.size()) +
                                     " values but dims imply " + std::to_string(t.element_count()));
        put_u32(out, static_cast<std::uint32_t>(t.name.size()));
        out.append(t.name);
        put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
        for (std::uint64_t d : t.dims) put_u64(out, d);
        std::size_t off = out.size();
        out.resize(off + t.data.size() * sizeof(double));
        std::memcpy(out.data() + off, t.data.data(), t.data.size() * sizeof(double));
    }
    write_binary_file(path, out.data(), out.size());
}

std::vector<NamedTensor> read_tensor_file(const std::filesystem::path& path) {
    std::vector<std::uint8_t> buf = read_binary_file(path);
    Reader r(buf, path.string());
    if (r.bytes(4) != std::string(kMagic, 4))
        throw std::runtime_error("not a weight file (bad magic): " + path.string());
    std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        throw std::runtime_error("unsupported weight file version " + std::to_string(version) +
                                 ": " + path.string());
    std::uint32_t count = r.u32();
    std::vector<NamedTensor> tensors;
    tensors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor t;
        std::uint32_t name_len = r.u32();
        t.name = r.bytes(name_len);
        std::uint32_t ndims = r.u32();
        t.dims.resize(ndims);
        for (std::uint32_t d = 0; d < ndims; ++d) t.dims[d] = r.u64();
        t.data.resize(t.element_count());
        r.doubles(t.data.data(), t.data.size());
        tensors.push_back(std::move(t));
    }
    if (!r.at_end())
        throw std::runtime_error("trailing bytes in weight file: " + path.string());
    return tensors;
}

std::map<std::string, const NamedTensor*> index_tensors(const std::vector<NamedTensor>& tensors) {
    std::map<std::string, const NamedTensor*> index;
    for (const NamedTensor& t : tensors) {
        if (!index.emplace(t.name, &t).second)
            throw std::runtime_error("duplicate tensor name '" + t.name + "'");
    }
    return index;
}

NamedTensor tensor_from_mat(const std::string& name, const Mat& m) {
    NamedTensor t;
    t.name = name;
    t.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    t.data.assign(m.data(), m.data() + m.size());
    return t;
}

Mat mat_from_tensor(const NamedTensor& t) {
    if (t.dims.size() != 2)
        throw std::runtime_error("tensor '" + t.name + "' is not 2-d");
    Mat m(static_cast<std::int64_t>(t.dims[0]), static_cast<std::int64_t>(t.dims[1]));
    std::memcpy(m.data(), t.data.data(), t.data.size() * sizeof(double));
    return m;
}

const NamedTensor& require_tensor(const std::map<std::string, const NamedTensor*>& index,
                                  const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw std::runtime_error("missing tensor '" + name + "'");
    return *it->second;
}

Mat require_mat(const std::map<std::string, const NamedTensor*>& index, const std::string& name,
                std::int64_t rows, std::int64_t cols) {
    Mat m = mat_from_tensor(require_tensor(index, name));
    if (m.rows() != rows || m.cols() != cols)
        throw std::runtime_error("tensor '" + name + "' has shape " + std::to_string(m.rows()) +
                                 "x" + std::to_string(m.cols()) + ", expected " +
                                 std::to_string(rows) + "x" + std::to_string(cols));
    return m;
}

Vec require_vec(const std::map<std::string, const NamedTensor*>& index, const std::string& name,
                std::int64_t size) {
    const NamedTensor& t = require_tensor(index, name);
    std::int64_t n = static_cast<std::int64_t>(t.element_count());
    if (t.dims.size() > 2 || n != size)
        throw std::runtime_error("tensor '" + name + "' has " + std::to_string(n) +
                                 " values, expected vector of " + std::to_string(size));
    Vec v(n);
    std::memcpy(v.data(), t.data.data(), t.data.size() * sizeof(double));
    return v;
}

}  // namespace mmphase
