#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "poselift/image.hpp"

namespace poselift {

/// Chroma-key masks for one frame, single channel, frame dimensions. The
/// foreground masks must be mutually disjoint when binarized at 0.5; values
/// act as alpha so soft edges blend linearly.
struct MaskSet {
  Image background;
  Image chair;
  Image upper_body;
  Image lower_body;
};

MaskSet make_mask_set(Image background, Image chair, Image upper_body, Image lower_body,
                      int frame_width, int frame_height);

/// Replacement assets: a full-frame background plus tileable region textures.
struct AugmentAssets {
  Image background;
  Image chair_texture;
  Image upper_body_texture;
  Image lower_body_texture;
};

struct CompositeOptions {
  std::uint64_t seed = 0;
  double shading_gain = 1.0;
  bool randomize_offsets = true;  // seeded texture offsets per region
  bool background = true;
  bool chair = true;
  bool upper_body = true;
  bool lower_body = true;
};

/// Per-pixel channel mean of the frame inside the mask, normalized to [0,1];
/// zero outside. Stands in for the shading layer on plain-colored regions.
FloatImage shading_surrogate(const Image& frame, const Image& mask);

/// Background replacement plus texture-times-shading compositing on the
/// chair / upper body / lower body regions, alpha-blended by mask value.
/// Pixels outside every mask are bit-identical to the input; output is
/// deterministic for a fixed seed. composite_reference is the serial
/// implementation kept for testing.
Image composite(const Image& frame, const MaskSet& masks, const AugmentAssets& assets,
                const CompositeOptions& options, int threads);
Image composite_reference(const Image& frame, const MaskSet& masks, const AugmentAssets& assets,
                          const CompositeOptions& options);

enum class AugmentTier : std::uint8_t { None, BgChair, Full };

struct TierProportions {
  double none = 0.25;
  double bg_chair = 0.40;
  double full = 0.35;
};

/// Corpus-level tier assignment: seeded shuffle, then contiguous split with
/// cumulative rounding. Tier counts deviate from the requested proportions by
/// at most one frame.
struct AugmentPlan {
  std::vector<AugmentTier> tiers;  // aligned with the frame-id order passed in
  TierProportions proportions;
  std::uint64_t seed = 0;
};

AugmentPlan plan_augmentation(const std::vector<std::string>& frame_ids,
                              const TierProportions& proportions, std::uint64_t seed);

void save_plan(const AugmentPlan& plan, const std::vector<std::string>& frame_ids,
               const std::string& path);

}  // namespace poselift
