#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sgsf/config.hpp"
#include "sgsf/contrast.hpp"
#include "sgsf/dataset_io.hpp"
#include "sgsf/losses.hpp"
#include "sgsf/metrics.hpp"
#include "sgsf/nets.hpp"
#include "sgsf/nn/adam.hpp"
#include "sgsf/saliency.hpp"

namespace sgsf::pipeline {

// base_lr * 0.1^(milestones passed); milestone m fires at epoch
// ceil(total_epochs * m).
double lr_schedule(int epoch, const RunConfig& cfg);

// Everything a run carries: both networks, the joint optimizer, the contrast
// index and the loss history. Checkpoints restore it bit-identically.
struct TrainState {
    RunConfig cfg;
    NetConfig net_cfg;
    SelfNet self_net;
    SegNet seg_net;
    nn::Adam adam;
    int epoch = 0; // completed epochs
    contrast::ContrastIndex index;
    bool index_built = false;
    std::vector<losses::LossValue> epoch_losses;

    explicit TrainState(const RunConfig& cfg);

    std::vector<nn::Param> all_params();
    contrast::DeepFeatureFn feature_fn();
};

struct BatchItem {
    const Image* seg_input = nullptr;
    const PixelLabels* label = nullptr;
    const Image* self_input = nullptr;
    const Image* self_target = nullptr;
    std::string stem;
};

// One joint Adam update of both networks from the combined loss.
losses::LossValue train_step(TrainState& st, const std::vector<BatchItem>& batch, double lr);

void save_checkpoint(TrainState& st, const std::string& path);
std::unique_ptr<TrainState> load_checkpoint(const std::string& path);

// Full training loop. Preloads the dataset, forges per epoch, manages the
// warm-up and contrast-index refreshes, snapshots to checkpoint_path every
// cfg.checkpoint_every epochs and at the end. Returns checkpoint_path.
std::string train(const DatasetIndex& data, const RunConfig& cfg,
                  const saliency::SaliencyProvider& sal, const std::string& checkpoint_path,
                  std::unique_ptr<TrainState> resume = nullptr, bool quiet = false);

// Guidance-driven inference on one image (no forging anywhere on this path).
ScoredResult infer_image(TrainState& st, const DatasetIndex& data, const Image& img,
                         const std::string& stem);
ScoredResult infer(TrainState& st, const DatasetIndex& data, const std::string& image_path);

MetricsReport evaluate(TrainState& st, const DatasetIndex& data);

} // namespace sgsf::pipeline
