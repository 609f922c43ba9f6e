#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sx/mesh.hpp"

namespace sx {

// Known/unknown split of a mesh plus the band bookkeeping used by the
// blending extrapolators. Boundary vertices are the known vertices with at
// least one unknown neighbor and sit at depth 0; depth n counts edge hops
// from the boundary walking through known vertices only, tracked up to
// max_depth inclusive. The overlap region is the set of banded vertices.
struct RegionPartition {
    static constexpr uint32_t kNoDepth = std::numeric_limits<uint32_t>::max();

    std::vector<uint8_t> unknown_mask;  // per vertex, 1 = unknown
    std::vector<uint32_t> unknown;      // sorted
    std::vector<uint32_t> boundary;     // sorted, subset of known
    std::vector<uint32_t> overlap;      // sorted known vertices with depth <= max_depth
    std::vector<uint32_t> depth;        // per vertex; kNoDepth outside the band
    uint32_t max_depth = 0;

    bool is_unknown(uint32_t v) const { return unknown_mask[v] != 0; }
    uint32_t vertex_count() const { return static_cast<uint32_t>(unknown_mask.size()); }
    uint32_t known_count() const { return vertex_count() - static_cast<uint32_t>(unknown.size()); }
};

RegionPartition compute_partition(const VertexAdjacency& adjacency,
                                  std::span<const uint32_t> unknown_indices,
                                  uint32_t max_depth);
RegionPartition compute_partition(const TriMesh& mesh,
                                  std::span<const uint32_t> unknown_indices,
                                  uint32_t max_depth);

}  // namespace sx
