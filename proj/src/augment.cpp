#include "poselift/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>
#include <omp.h>

#include "poselift/error.hpp"
#include "poselift/parallel.hpp"

namespace poselift {

namespace {

void require_mask(const Image& mask, int width, int height, const char* name) {
  if (mask.channels != 1)
    fail(ErrorKind::DimMismatch, std::string(name) + " mask must be single channel");
  if (mask.width != width || mask.height != height)
    fail(ErrorKind::DimMismatch, std::string(name) + " mask dimensions do not match the frame");
}

struct RegionJob {
  const Image* mask = nullptr;
  const Image* texture = nullptr;
  int dx = 0;
  int dy = 0;
};

inline std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 255.0f)));
}

Image composite_impl(const Image& frame, const MaskSet& masks, const AugmentAssets& assets,
                     const CompositeOptions& options, int n_threads) {
  if (frame.channels != 3) fail(ErrorKind::DimMismatch, "frame must be RGB");
  require_mask(masks.background, frame.width, frame.height, "background");
  require_mask(masks.chair, frame.width, frame.height, "chair");
  require_mask(masks.upper_body, frame.width, frame.height, "upper_body");
  require_mask(masks.lower_body, frame.width, frame.height, "lower_body");
  if (options.background) {
    if (assets.background.channels != 3 || !assets.background.same_dims(frame))
      fail(ErrorKind::DimMismatch, "background asset must be RGB at frame dimensions");
  }

  // offsets are drawn in a fixed order so a seed pins the whole frame
  std::mt19937_64 rng(options.seed);
  auto draw_offset = [&](const Image& texture) {
    std::pair<int, int> off{0, 0};
    if (options.randomize_offsets && texture.width > 0 && texture.height > 0) {
      off.first = static_cast<int>(rng() % static_cast<std::uint64_t>(texture.width));
      off.second = static_cast<int>(rng() % static_cast<std::uint64_t>(texture.height));
    }
    return off;
  };
  const auto chair_off = draw_offset(assets.chair_texture);
  const auto upper_off = draw_offset(assets.upper_body_texture);
  const auto lower_off = draw_offset(assets.lower_body_texture);

  std::vector<RegionJob> regions;
  auto add_region = [&](bool enabled, const Image& mask, const Image& texture,
                        std::pair<int, int> off, const char* name) {
    if (!enabled) return;
    if (texture.channels != 3 || texture.width <= 0 || texture.height <= 0)
      fail(ErrorKind::DimMismatch, std::string(name) + " texture must be a nonempty RGB image");
    regions.push_back(RegionJob{&mask, &texture, off.first, off.second});
  };
  add_region(options.chair, masks.chair, assets.chair_texture, chair_off, "chair");
  add_region(options.upper_body, masks.upper_body, assets.upper_body_texture, upper_off,
             "upper_body");
  add_region(options.lower_body, masks.lower_body, assets.lower_body_texture, lower_off,
             "lower_body");

  Image out = frame;
  const float gain = static_cast<float>(options.shading_gain);

#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      float v[3] = {static_cast<float>(frame.at(x, y, 0)), static_cast<float>(frame.at(x, y, 1)),
                    static_cast<float>(frame.at(x, y, 2))};
      if (options.background) {
        const float m = static_cast<float>(masks.background.at(x, y, 0)) / 255.0f;
        if (m > 0) {
          for (int c = 0; c < 3; ++c)
            v[c] = m * static_cast<float>(assets.background.at(x, y, c)) + (1.0f - m) * v[c];
        }
      }
      if (!regions.empty()) {
        // shading from the source frame, not the partially composited value
        const float shade = (static_cast<float>(frame.at(x, y, 0)) +
                             static_cast<float>(frame.at(x, y, 1)) +
                             static_cast<float>(frame.at(x, y, 2))) /
                            (3.0f * 255.0f);
        for (const RegionJob& region : regions) {
          const float m = static_cast<float>(region.mask->at(x, y, 0)) / 255.0f;
          if (m <= 0) continue;
          const int tx = (x + region.dx) % region.texture->width;
          const int ty = (y + region.dy) % region.texture->height;
          for (int c = 0; c < 3; ++c) {
            const float textured =
                static_cast<float>(region.texture->at(tx, ty, c)) * shade * gain;
            v[c] = m * textured + (1.0f - m) * v[c];
          }
        }
      }
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = quantize(v[c]);
    }
  }
  return out;
}

}  // namespace

MaskSet make_mask_set(Image background, Image chair, Image upper_body, Image lower_body,
                      int frame_width, int frame_height) {
  require_mask(background, frame_width, frame_height, "background");
  require_mask(chair, frame_width, frame_height, "chair");
  require_mask(upper_body, frame_width, frame_height, "upper_body");
  require_mask(lower_body, frame_width, frame_height, "lower_body");
  // foreground regions must not overlap once binarized
  for (size_t i = 0; i < background.data.size(); ++i) {
    const int hits = (chair.data[i] >= 128) + (upper_body.data[i] >= 128) +
                     (lower_body.data[i] >= 128);
    if (hits > 1)
      fail(ErrorKind::InvariantViolation, "foreground masks overlap at pixel " + std::to_string(i));
  }
  return MaskSet{std::move(background), std::move(chair), std::move(upper_body),
                 std::move(lower_body)};
}

FloatImage shading_surrogate(const Image& frame, const Image& mask) {
  if (frame.channels != 3) fail(ErrorKind::DimMismatch, "frame must be RGB");
  require_mask(mask, frame.width, frame.height, "shading");
  FloatImage out;
  out.width = frame.width;
  out.height = frame.height;
  out.data.assign(static_cast<size_t>(frame.width) * frame.height, 0.0f);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (mask.at(x, y, 0) == 0) continue;
      out.at(x, y) = (static_cast<float>(frame.at(x, y, 0)) + static_cast<float>(frame.at(x, y, 1)) +
                      static_cast<float>(frame.at(x, y, 2))) /
                     (3.0f * 255.0f);
    }
  }
  return out;
}

Image composite(const Image& frame, const MaskSet& masks, const AugmentAssets& assets,
                const CompositeOptions& options, int threads) {
  return composite_impl(frame, masks, assets, options, resolve_threads(threads));
}

Image composite_reference(const Image& frame, const MaskSet& masks, const AugmentAssets& assets,
                          const CompositeOptions& options) {
  return composite_impl(frame, masks, assets, options, 1);
}

AugmentPlan plan_augmentation(const std::vector<std::string>& frame_ids,
                              const TierProportions& proportions, std::uint64_t seed) {
  const double sum = proportions.none + proportions.bg_chair + proportions.full;
  if (std::abs(sum - 1.0) > 1e-9 || proportions.none < 0 || proportions.bg_chair < 0 ||
      proportions.full < 0)
    fail(ErrorKind::BadProportions, "tier proportions must be nonnegative and sum to 1");

  const size_t n = frame_ids.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  // hand-rolled Fisher-Yates; std::shuffle is not pinned across libraries
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i + 1 < n; ++i) {
    const size_t j = i + static_cast<size_t>(rng() % static_cast<std::uint64_t>(n - i));
    std::swap(order[i], order[j]);
  }

  // cumulative rounding keeps every tier within one frame of exact
  const auto boundary = [&](double p) {
    return static_cast<size_t>(std::llround(p * static_cast<double>(n)));
  };
  const size_t b_none = boundary(proportions.none);
  const size_t b_bg = boundary(proportions.none + proportions.bg_chair);

  AugmentPlan plan;
  plan.proportions = proportions;
  plan.seed = seed;
  plan.tiers.assign(n, AugmentTier::Full);
  for (size_t i = 0; i < n; ++i) {
    if (i < b_none)
      plan.tiers[order[i]] = AugmentTier::None;
    else if (i < b_bg)
      plan.tiers[order[i]] = AugmentTier::BgChair;
  }
  return plan;
}

void save_plan(const AugmentPlan& plan, const std::vector<std::string>& frame_ids,
               const std::string& path) {
  if (frame_ids.size() != plan.tiers.size())
    fail(ErrorKind::ShapeMismatch, "plan and frame id counts differ");
  nlohmann::json doc;
  doc["seed"] = plan.seed;
  doc["proportions"] = {{"none", plan.proportions.none},
                        {"bg_chair", plan.proportions.bg_chair},
                        {"full", plan.proportions.full}};
  auto& tiers = doc["tiers"] = nlohmann::json::array();
  static const char* names[] = {"none", "bg_chair", "full"};
  for (size_t i = 0; i < frame_ids.size(); ++i)
    tiers.push_back({{"id", frame_ids[i]}, {"tier", names[static_cast<int>(plan.tiers[i])]}});

  std::ofstream out(path + ".tmp");
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  out << doc.dump(2) << "\n";
  out.close();
  std::rename((path + ".tmp").c_str(), path.c_str());
}

}  // namespace poselift
