// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Self-describing container for named double tensors ("MMPW"). Raw IEEE-754
// little-endian payloads, so save/load round-trips are bit-exact.

#ifndef MMPHASE_WEIGHTS_IO_HPP
#define MMPHASE_WEIGHTS_IO_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nn.hpp"

namespace mmphase {

struct NamedTensor {
    std::string name;
    std::vector<std::uint64_t> dims;
    std::vector<double> data;

    std::uint64_t element_count() const;
};

void write_tensor_file(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensor_file(const std::filesystem::path& path);

std::map<std::string, const NamedTensor*> index_tensors(const std::vector<NamedTensor>& tensors);

// Eigen matrices stored column-major with dims {rows, cols}.
NamedTensor tensor_from_mat(const std::string& name, const Mat& m);
Mat mat_from_tensor(const NamedTensor& t);

// Fetch helpers that throw with the tensor name on any mismatch.
const NamedTensor& require_tensor(const std::map<std::string, const NamedTensor*>& index,
                                  const std::string& name);
Mat require_mat(const std::map<std::string, const NamedTensor*>& index, const std::string& name,
                std::int64_t rows, std::int64_t cols);
Vec require_vec(const std::map<std::string, const NamedTensor*>& index, const std::string& name,
                std::int64_t size);

}  // namespace mmphase

#endif
