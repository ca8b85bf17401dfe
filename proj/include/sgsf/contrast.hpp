#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sgsf/image.hpp"
#include "sgsf/nn/tensor.hpp"
#include "sgsf/rng.hpp"

namespace sgsf::contrast {

// Mean-pooled deep feature vector, stored float32 so the on-disk index
// round-trips exactly.
using Embedding = std::vector<float>;

struct IndexEntry {
    std::string stem;
    Embedding vec;
};

struct ContrastIndex {
    std::vector<IndexEntry> entries;
    std::string built_from; // dataset fingerprint

    size_t size() const { return entries.size(); }
    const IndexEntry* find(const std::string& stem) const;
};

struct ContrastMember {
    std::string stem;
    double similarity;
};

// Most-similar-first; the query image itself never appears.
using ContrastSet = std::vector<ContrastMember>;

enum class QueryMode { train, test };

// Maps an image to its deepest encoder feature block (c,h,w).
using DeepFeatureFn = std::function<nn::Tensor(const Image&)>;

// Spatial mean pooling of the deepest feature block.
Embedding embed(const nn::Tensor& deepest);
Embedding embed(const Image& img, const DeepFeatureFn& encoder);

// Cosine similarity with epsilon-floored norms, accumulated in double.
double cosine(const Embedding& a, const Embedding& b);

ContrastIndex build_index(const std::vector<std::string>& stems,
                          const std::vector<const Image*>& images, const DeepFeatureFn& encoder,
                          const std::string& dataset_fingerprint);

// All similarities sorted descending (ties by ascending stem), query stem
// removed. Train mode returns the top n (clamped with a warning when fewer
// remain); test mode returns the single best match.
ContrastSet query(const ContrastIndex& index, const std::string& query_stem,
                  const Embedding& query_emb, int n, QueryMode mode);

// Train mode samples uniformly; test mode always takes the top member.
std::string sample_guidance(const ContrastSet& cset, Rng& rng, QueryMode mode);

void save_index(const ContrastIndex& index, const std::string& path);
ContrastIndex load_index(const std::string& path);

void serialize_index(const ContrastIndex& index, std::ostream& out);
ContrastIndex deserialize_index(std::istream& in);

} // namespace sgsf::contrast
