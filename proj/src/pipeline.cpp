#include "sgsf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "sgsf/error.hpp"
#include "sgsf/forge.hpp"
#include "sgsf/kernels.hpp"

namespace sgsf::pipeline {
namespace {

constexpr char kMagic[4] = {'S', 'G', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

// Stream tags so every consumer of the run seed gets its own derived stream.
constexpr std::uint64_t kInitTag = 0x696e6974;  // weight init
constexpr std::uint64_t kEpochTag = 0x65706f63; // per-epoch data stream

NetConfig net_config_from(const RunConfig& cfg) {
    NetConfig nc;
    nc.in_channels = cfg.channels;
    nc.base_channels = cfg.base_channels;
    nc.depth = 4;
    return nc;
}

int warmup_epochs(const RunConfig& cfg) {
    return std::max(1, static_cast<int>(std::ceil(0.1 * cfg.total_epochs)));
}

struct LoadedDataset {
    std::vector<std::string> stems;
    std::vector<Image> images;
    std::vector<SaliencyMap> saliencies;
    std::vector<Image> aux_pool;
    std::map<std::string, size_t> by_stem;
};

LoadedDataset preload(const DatasetIndex& data, const RunConfig& cfg,
                      const saliency::SaliencyProvider& sal, bool need_aux) {
    if (data.train_normals.empty())
        throw ValidationError("training set is empty (no images under train/good)");
    LoadedDataset out;
    for (const auto& path : data.train_normals) {
        const std::string stem = path_stem(path);
        out.stems.push_back(stem);
        out.images.push_back(load_image(path, cfg.image_side, cfg.channels));
        out.saliencies.push_back(sal.get(out.images.back(), stem));
        out.by_stem[stem] = out.images.size() - 1;
    }
    if (need_aux) {
        if (data.aux_textures.empty())
            throw ValidationError("auxiliary texture pool is empty; forging needs --aux-dir");
        for (const auto& path : data.aux_textures)
            out.aux_pool.push_back(load_image(path, cfg.image_side, cfg.channels));
    }
    return out;
}

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
void write_str(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string read_str(std::istream& in) {
    std::string s(read_u32(in), '\0');
    in.read(s.data(), static_cast<std::streamsize>(s.size()));
    return s;
}
void write_doubles(std::ostream& out, const double* p, std::uint64_t n) {
    write_u64(out, n);
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}
void read_doubles(std::istream& in, double* p, std::uint64_t expected) {
    const std::uint64_t n = read_u64(in);
    if (n != expected) throw RuntimeFailure("checkpoint: parameter block size mismatch");
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

} // namespace

double lr_schedule(int epoch, const RunConfig& cfg) {
    int passed = 0;
    for (double m : cfg.decay_milestones)
        if (epoch >= static_cast<int>(std::ceil(cfg.total_epochs * m))) ++passed;
    return cfg.lr * std::pow(0.1, passed);
}

TrainState::TrainState(const RunConfig& cfg_in)
    : cfg(cfg_in), net_cfg(net_config_from(cfg_in)), self_net(net_cfg), seg_net(net_cfg) {
    cfg.validate();
    Rng init_rng(Rng::mix(cfg.seed, kInitTag));
    self_net.init(init_rng);
    seg_net.init(init_rng);
    adam.attach(all_params());
}

std::vector<nn::Param> TrainState::all_params() {
    std::vector<nn::Param> params = self_net.params();
    for (auto& p : seg_net.params()) params.push_back(p);
    return params;
}

contrast::DeepFeatureFn TrainState::feature_fn() {
    return [this](const Image& img) { return self_net.encode(nn::from_image(img)); };
}

losses::LossValue train_step(TrainState& st, const std::vector<BatchItem>& batch, double lr) {
    if (batch.empty()) throw ValidationError("train step on an empty batch");
    std::vector<const Image*> seg_in, self_in, self_target;
    std::vector<const Grid*> labels;
    for (const auto& item : batch) {
        seg_in.push_back(item.seg_input);
        self_in.push_back(item.self_input);
        self_target.push_back(item.self_target);
        labels.push_back(item.label);
    }
    const nn::Tensor x_self = nn::from_images(self_in);
    const nn::Tensor x_target = nn::from_images(self_target);
    const nn::Tensor x_seg = nn::from_images(seg_in);
    const nn::Tensor y = nn::from_grids(labels);

    st.self_net.zero_grad();
    st.seg_net.zero_grad();

    const auto& selfF = st.self_net.forward(x_self);
    const auto& segF = st.seg_net.forward(x_seg, selfF.dec);

    nn::Tensor d_recon_l2, d_recon_ssim, d_out;
    const double l2 = losses::l2_loss_grad(x_target, selfF.recon, d_recon_l2);
    const double ssim = losses::ssim_loss_grad(x_target, selfF.recon, st.cfg.ssim_window,
                                               d_recon_ssim);
    const double focal = losses::focal_loss_grad(segF.out, y, st.cfg.tau, d_out);
    const losses::LossValue loss = losses::combine(l2, ssim, focal, st.cfg.lambda);

    if (!std::isfinite(loss.total)) {
        std::ostringstream msg;
        msg << "non-finite loss (l2=" << l2 << " ssim=" << ssim << " focal=" << focal
            << ") seed=" << st.cfg.seed << " epoch=" << st.epoch << " stems:";
        for (const auto& item : batch) msg << " " << item.stem;
        throw RuntimeFailure(msg.str());
    }

    // d(total)/d(recon) = lambda * (d_l2 + d_ssim); the guidance gradients
    // from the focal term carry weight 1.
    nn::Tensor d_recon(d_recon_l2.n, d_recon_l2.c, d_recon_l2.h, d_recon_l2.w);
    kernels::active().axpy(st.cfg.lambda, d_recon_l2.v.data(), d_recon.v.data(), d_recon.size());
    kernels::active().axpy(st.cfg.lambda, d_recon_ssim.v.data(), d_recon.v.data(), d_recon.size());

    const std::vector<nn::Tensor> d_guidance = st.seg_net.backward(d_out);
    st.self_net.backward(d_recon, d_guidance);

    const auto params = st.all_params();
    st.adam.step(params, lr);
    return loss;
}

void save_checkpoint(TrainState& st, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);
    write_str(out, serialize_config(st.cfg));
    write_u32(out, static_cast<std::uint32_t>(st.epoch));
    write_u64(out, static_cast<std::uint64_t>(st.adam.step_count()));

    auto params = st.all_params();
    write_u64(out, params.size());
    for (const auto& p : params) write_doubles(out, p.value, p.size);
    for (size_t i = 0; i < params.size(); ++i) {
        write_doubles(out, st.adam.first_moments()[i].data(), params[i].size);
        write_doubles(out, st.adam.second_moments()[i].data(), params[i].size);
    }

    out.put(st.index_built ? 1 : 0);
    if (st.index_built) contrast::serialize_index(st.index, out);

    write_u32(out, static_cast<std::uint32_t>(st.epoch_losses.size()));
    for (const auto& l : st.epoch_losses) {
        const double vals[4] = {l.total, l.l2, l.ssim, l.focal};
        out.write(reinterpret_cast<const char*>(vals), sizeof(vals));
    }
    if (!out) throw RuntimeFailure("short write on checkpoint: " + path);
}

std::unique_ptr<TrainState> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeFailure("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw RuntimeFailure("not a checkpoint file: " + path);
    if (read_u32(in) != kVersion) throw RuntimeFailure("unsupported checkpoint version");

    const RunConfig cfg = parse_config_text(read_str(in));
    auto st = std::make_unique<TrainState>(cfg);
    st->epoch = static_cast<int>(read_u32(in));
    st->adam.set_step_count(static_cast<int>(read_u64(in)));

    auto params = st->all_params();
    if (read_u64(in) != params.size())
        throw RuntimeFailure("checkpoint: parameter count mismatch");
    for (auto& p : params) read_doubles(in, p.value, p.size);
    for (size_t i = 0; i < params.size(); ++i) {
        read_doubles(in, st->adam.first_moments()[i].data(), params[i].size);
        read_doubles(in, st->adam.second_moments()[i].data(), params[i].size);
    }

    st->index_built = in.get() == 1;
    if (st->index_built) st->index = contrast::deserialize_index(in);

    const std::uint32_t n_hist = read_u32(in);
    st->epoch_losses.resize(n_hist);
    for (auto& l : st->epoch_losses) {
        double vals[4];
        in.read(reinterpret_cast<char*>(vals), sizeof(vals));
        l.total = vals[0];
        l.l2 = vals[1];
        l.ssim = vals[2];
        l.focal = vals[3];
    }
    if (!in) throw RuntimeFailure("truncated checkpoint: " + path);
    return st;
}

std::string train(const DatasetIndex& data, const RunConfig& cfg,
                  const saliency::SaliencyProvider& sal, const std::string& checkpoint_path,
                  std::unique_ptr<TrainState> resume, bool quiet) {
    cfg.validate();
    auto st = resume ? std::move(resume) : std::make_unique<TrainState>(cfg);
    const LoadedDataset ds = preload(data, st->cfg, sal, /*need_aux=*/true);

    const int total = st->cfg.total_epochs;
    const int warm = warmup_epochs(st->cfg);

    for (int epoch = st->epoch; epoch < total; ++epoch) {
        if (epoch >= warm && (!st->index_built || (epoch - warm) % warm == 0)) {
            std::vector<const Image*> imgs;
            for (const auto& im : ds.images) imgs.push_back(&im);
            st->index = contrast::build_index(ds.stems, imgs, st->feature_fn(),
                                              data.fingerprint());
            st->index_built = true;
        }

        const double lr = lr_schedule(epoch, st->cfg);
        Rng rng(Rng::mix(st->cfg.seed, kEpochTag, static_cast<std::uint64_t>(epoch)));

        std::vector<size_t> order(ds.images.size());
        std::iota(order.begin(), order.end(), 0);
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(static_cast<int>(i))]);

        std::vector<const Image*> slot_images;
        std::vector<const SaliencyMap*> slot_sal;
        std::vector<std::string> slot_stems;
        for (size_t idx : order) {
            slot_images.push_back(&ds.images[idx]);
            slot_sal.push_back(&ds.saliencies[idx]);
            slot_stems.push_back(ds.stems[idx]);
        }
        std::vector<forge::MixedSample> mixed =
            forge::mix_batch(slot_images, slot_sal, slot_stems, ds.aux_pool, st->cfg, rng);

        // Guidance stems are drawn identically in both self-task modes; only
        // the input/target pairing differs.
        std::vector<std::string> guidance_stems;
        guidance_stems.reserve(mixed.size());
        for (const auto& slot : mixed) {
            if (!st->index_built) {
                const size_t self_idx = ds.by_stem.at(slot.source_stem);
                int j = rng.uniform_int(static_cast<int>(ds.images.size()) - 1);
                if (j >= static_cast<int>(self_idx)) ++j;
                guidance_stems.push_back(ds.stems[j]);
            } else {
                const auto* entry = st->index.find(slot.source_stem);
                if (entry == nullptr)
                    throw RuntimeFailure("contrast index is missing train stem " +
                                         slot.source_stem);
                const auto cset = contrast::query(st->index, slot.source_stem, entry->vec,
                                                  st->cfg.n_contrast, contrast::QueryMode::train);
                guidance_stems.push_back(
                    contrast::sample_guidance(cset, rng, contrast::QueryMode::train));
            }
        }

        losses::LossValue epoch_loss;
        int n_batches = 0;
        for (size_t start = 0; start < mixed.size(); start += st->cfg.batch_size) {
            const size_t stop = std::min(mixed.size(), start + st->cfg.batch_size);
            std::vector<BatchItem> batch;
            for (size_t i = start; i < stop; ++i) {
                BatchItem item;
                item.seg_input = &mixed[i].image;
                item.label = &mixed[i].label;
                item.stem = mixed[i].source_stem;
                if (st->cfg.self_task == SelfTask::reconstruction) {
                    const Image& guide = ds.images[ds.by_stem.at(guidance_stems[i])];
                    item.self_input = &guide;
                    item.self_target = &guide;
                } else {
                    item.self_input = &mixed[i].image;
                    item.self_target = &ds.images[ds.by_stem.at(mixed[i].source_stem)];
                }
                batch.push_back(item);
            }
            const losses::LossValue l = train_step(*st, batch, lr);
            epoch_loss.total += l.total;
            epoch_loss.l2 += l.l2;
            epoch_loss.ssim += l.ssim;
            epoch_loss.focal += l.focal;
            ++n_batches;
        }
        epoch_loss.total /= n_batches;
        epoch_loss.l2 /= n_batches;
        epoch_loss.ssim /= n_batches;
        epoch_loss.focal /= n_batches;
        st->epoch_losses.push_back(epoch_loss);
        st->epoch = epoch + 1;

        if (!quiet)
            std::cerr << "[sgsf] epoch " << st->epoch << "/" << total << " lr " << lr
                      << " loss " << epoch_loss.total << " (l2 " << epoch_loss.l2 << " ssim "
                      << epoch_loss.ssim << " focal " << epoch_loss.focal << ")\n";

        if (st->cfg.checkpoint_every > 0 && st->epoch % st->cfg.checkpoint_every == 0 &&
            st->epoch < total)
            save_checkpoint(*st, checkpoint_path);
    }

    save_checkpoint(*st, checkpoint_path);
    return checkpoint_path;
}

ScoredResult infer_image(TrainState& st, const DatasetIndex& data, const Image& img,
                         const std::string& stem) {
    if (!st.index_built || st.index.entries.empty())
        throw RuntimeFailure("no contrast index in this checkpoint; train beyond the warm-up "
                             "phase or run build-contrast first");
    const contrast::Embedding emb = contrast::embed(img, st.feature_fn());
    const auto cset = contrast::query(st.index, stem, emb, 1, contrast::QueryMode::test);
    const std::string guide_stem = cset.front().stem;

    std::string guide_path;
    for (const auto& p : data.train_normals)
        if (path_stem(p) == guide_stem) {
            guide_path = p;
            break;
        }
    if (guide_path.empty())
        throw RuntimeFailure("guidance image '" + guide_stem + "' not found under train/good");

    const Image guide = load_image(guide_path, st.cfg.image_side, st.cfg.channels);
    const auto& selfF = st.self_net.forward(nn::from_image(guide));
    const auto& segF = st.seg_net.forward(nn::from_image(img), selfF.dec);

    ScoredResult res;
    res.map = nn::to_grid(segF.out, 0);
    auto [smoothed, score] = smooth_and_score(res.map, st.cfg.smoothing_window);
    (void)smoothed;
    res.score = score;
    res.stem = stem;
    res.smoothing_window = st.cfg.smoothing_window;
    return res;
}

ScoredResult infer(TrainState& st, const DatasetIndex& data, const std::string& image_path) {
    const Image img = load_image(image_path, st.cfg.image_side, st.cfg.channels);
    return infer_image(st, data, img, path_stem(image_path));
}

MetricsReport evaluate(TrainState& st, const DatasetIndex& data) {
    if (data.test_items.empty())
        throw ValidationError("evaluation refused: the dataset has no test items");
    std::vector<ScoredResult> results;
    for (const auto& item : data.test_items) {
        const Image img = load_image(item.image_path, st.cfg.image_side, st.cfg.channels);
        ScoredResult res = infer_image(st, data, img, item.stem);
        res.image_label = item.is_anomalous ? 1 : 0;
        if (!item.is_anomalous) {
            res.has_pixel_labels = true;
            res.pixel_labels = PixelLabels(st.cfg.image_side, st.cfg.image_side, 0.0);
        } else if (item.mask_available) {
            res.has_pixel_labels = true;
            res.pixel_labels = load_mask(item.mask_path, st.cfg.image_side);
        }
        results.push_back(std::move(res));
    }
    return assemble_report(results, data.category, config_fingerprint(st.cfg));
}

} // namespace sgsf::pipeline
