#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sx/harness.hpp"
#include "sx/ssm.hpp"

namespace sx {

// Model file: magic "SSM1", little-endian; u32 header (vertex count,
// triangle count, mode count, sample count); f64 mean (3V), f64 modes
// (N x 3V row-major), f64 stddevs (N); u32 triangle indices (3T).
// Write -> read reproduces every array bit-exactly. Loading re-checks the
// mode Gram matrix against identity (1e-8).
void write_model(const std::string& path, const ShapeModel& model);
ShapeModel read_model(const std::string& path);

// Partition file: JSON document with version, vertex_count, sorted unique
// unknown_indices, and optional crop provenance.
struct PartitionFileData {
    uint32_t vertex_count = 0;
    std::vector<uint32_t> unknown;
    std::optional<CropSpec> crop;
};

void write_partition(const std::string& path, const PartitionFileData& data);
PartitionFileData read_partition(const std::string& path);

}  // namespace sx
