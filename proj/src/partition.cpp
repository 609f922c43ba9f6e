#include "sx/partition.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "sx/errors.hpp"

namespace sx {

RegionPartition compute_partition(const VertexAdjacency& adjacency,
                                  std::span<const uint32_t> unknown_indices,
                                  uint32_t max_depth) {
    const uint32_t v = adjacency.vertex_count();
    if (unknown_indices.empty()) throw Error("partition rejected: unknown set is empty");

    RegionPartition part;
    part.max_depth = max_depth;
    part.unknown_mask.assign(v, 0);
    for (uint32_t idx : unknown_indices) {
        if (idx >= v)
            throw Error("partition index " + std::to_string(idx) + " out of range (" +
                        std::to_string(v) + " vertices)");
        part.unknown_mask[idx] = 1;
    }
    part.unknown.assign(unknown_indices.begin(), unknown_indices.end());
    std::sort(part.unknown.begin(), part.unknown.end());
    part.unknown.erase(std::unique(part.unknown.begin(), part.unknown.end()), part.unknown.end());
    if (part.unknown.size() == v) throw Error("partition rejected: every vertex is unknown");

    // Boundary: known vertices touching an unknown one; they seed the BFS at
    // depth 0 and the walk never leaves the known region.
    part.depth.assign(v, RegionPartition::kNoDepth);
    std::deque<uint32_t> frontier;
    for (uint32_t u : part.unknown) {
        for (uint32_t n : adjacency.neighbors(u)) {
            if (!part.unknown_mask[n] && part.depth[n] == RegionPartition::kNoDepth) {
                part.depth[n] = 0;
                part.boundary.push_back(n);
                frontier.push_back(n);
            }
        }
    }
    std::sort(part.boundary.begin(), part.boundary.end());

    while (!frontier.empty()) {
        uint32_t cur = frontier.front();
        frontier.pop_front();
        if (part.depth[cur] == max_depth) continue;
        for (uint32_t n : adjacency.neighbors(cur)) {
            if (!part.unknown_mask[n] && part.depth[n] == RegionPartition::kNoDepth) {
                part.depth[n] = part.depth[cur] + 1;
                frontier.push_back(n);
            }
        }
    }

    for (uint32_t i = 0; i < v; ++i)
        if (part.depth[i] != RegionPartition::kNoDepth) part.overlap.push_back(i);
    return part;
}

RegionPartition compute_partition(const TriMesh& mesh, std::span<const uint32_t> unknown_indices,
                                  uint32_t max_depth) {
    return compute_partition(VertexAdjacency(mesh), unknown_indices, max_depth);
}

}  // namespace sx
