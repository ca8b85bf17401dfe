#include "sgsf/contrast.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>

#include "sgsf/error.hpp"

namespace sgsf::contrast {
namespace {

constexpr char kMagic[4] = {'S', 'G', 'C', 'I'};
constexpr std::uint32_t kVersion = 1;
constexpr double kNormFloor = 1e-12;

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

void write_str(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& in) {
    const std::uint32_t len = read_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    return s;
}

} // namespace

const IndexEntry* ContrastIndex::find(const std::string& stem) const {
    for (const auto& e : entries)
        if (e.stem == stem) return &e;
    return nullptr;
}

Embedding embed(const nn::Tensor& deepest) {
    const size_t plane = deepest.plane_size();
    Embedding out(deepest.c);
    for (int c = 0; c < deepest.c; ++c) {
        const double* p = deepest.v.data() + static_cast<size_t>(c) * plane;
        double s = 0.0;
        for (size_t i = 0; i < plane; ++i) s += p[i];
        out[c] = static_cast<float>(s / static_cast<double>(plane));
    }
    return out;
}

Embedding embed(const Image& img, const DeepFeatureFn& encoder) { return embed(encoder(img)); }

double cosine(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) throw ValidationError("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    return dot / (std::max(std::sqrt(na), kNormFloor) * std::max(std::sqrt(nb), kNormFloor));
}

ContrastIndex build_index(const std::vector<std::string>& stems,
                          const std::vector<const Image*>& images, const DeepFeatureFn& encoder,
                          const std::string& dataset_fingerprint) {
    if (stems.empty() || stems.size() != images.size())
        throw ValidationError("contrast index: empty or inconsistent training set");
    ContrastIndex idx;
    idx.built_from = dataset_fingerprint;
    idx.entries.reserve(stems.size());
    for (size_t i = 0; i < stems.size(); ++i)
        idx.entries.push_back({stems[i], embed(*images[i], encoder)});
    return idx;
}

ContrastSet query(const ContrastIndex& index, const std::string& query_stem,
                  const Embedding& query_emb, int n, QueryMode mode) {
    if (index.entries.empty()) throw ValidationError("contrast query on an empty index");
    ContrastSet all;
    all.reserve(index.entries.size());
    for (const auto& e : index.entries) {
        if (e.stem == query_stem) continue;
        all.push_back({e.stem, cosine(query_emb, e.vec)});
    }
    if (all.empty()) throw ValidationError("contrast query: no candidates besides the query itself");
    std::sort(all.begin(), all.end(), [](const ContrastMember& x, const ContrastMember& y) {
        if (x.similarity != y.similarity) return x.similarity > y.similarity;
        return x.stem < y.stem;
    });

    size_t want = mode == QueryMode::test ? 1 : static_cast<size_t>(n);
    if (mode == QueryMode::train && want > all.size()) {
        std::cerr << "[sgsf] warning: contrast set size " << n << " clamped to " << all.size()
                  << " available entries\n";
        want = all.size();
    }
    all.resize(std::min(want, all.size()));
    return all;
}

std::string sample_guidance(const ContrastSet& cset, Rng& rng, QueryMode mode) {
    if (cset.empty()) throw ValidationError("guidance sampling from an empty contrast set");
    if (mode == QueryMode::test) return cset.front().stem;
    return cset[rng.uniform_int(static_cast<int>(cset.size()))].stem;
}

void serialize_index(const ContrastIndex& index, std::ostream& out) {
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);
    const std::uint32_t d =
        index.entries.empty() ? 0 : static_cast<std::uint32_t>(index.entries[0].vec.size());
    write_u32(out, d);
    write_u32(out, static_cast<std::uint32_t>(index.entries.size()));
    write_str(out, index.built_from);
    for (const auto& e : index.entries) {
        write_str(out, e.stem);
        out.write(reinterpret_cast<const char*>(e.vec.data()),
                  static_cast<std::streamsize>(sizeof(float) * e.vec.size()));
    }
}

ContrastIndex deserialize_index(std::istream& in) {
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw RuntimeFailure("not a contrast index file");
    const std::uint32_t version = read_u32(in);
    if (version != kVersion)
        throw RuntimeFailure("unsupported contrast index version " + std::to_string(version));
    const std::uint32_t d = read_u32(in);
    const std::uint32_t m = read_u32(in);
    ContrastIndex idx;
    idx.built_from = read_str(in);
    idx.entries.resize(m);
    for (auto& e : idx.entries) {
        e.stem = read_str(in);
        e.vec.resize(d);
        in.read(reinterpret_cast<char*>(e.vec.data()),
                static_cast<std::streamsize>(sizeof(float) * d));
    }
    if (!in) throw RuntimeFailure("truncated contrast index");
    return idx;
}

void save_index(const ContrastIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write contrast index: " + path);
    serialize_index(index, out);
    if (!out) throw RuntimeFailure("short write on contrast index: " + path);
}

ContrastIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeFailure("cannot open contrast index: " + path);
    return deserialize_index(in);
}

} // namespace sgsf::contrast
