#include "flipforge/datagen.hpp"
#include "flipforge/error.hpp"
#include "flipforge/simulate.hpp"
#include "support/test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace flipforge;
namespace ft = flipforge::testing;

namespace {

FramePair random_pair(Rng &rng, std::uint32_t w, std::uint32_t h) {
  return {{0, ft::random_grid(rng, w, h)}, {1, ft::random_grid(rng, w, h)}, 1, false};
}

CropPair constant_crop(std::uint32_t s, double before, double after) {
  return {Grid(s, s, before), Grid(s, s, after), {1, 0, 0}, s};
}

SimResult busy_simulation() {
  SimConfig cfg;
  cfg.width = cfg.height = 128;
  cfg.n_frames = 12;
  cfg.n_cells = 30;
  cfg.division_rate = 0.05;
  cfg.seed = 21;
  return simulate(cfg);
}

} // namespace

// Frame-order flipping

TEST(FlipPair, SwapsFramesAndTogglesFlag) {
  Rng rng(1);
  const FramePair p = random_pair(rng, 8, 6);
  const FramePair f = flip_pair(p);
  EXPECT_EQ(f.before, p.after);
  EXPECT_EQ(f.after, p.before);
  EXPECT_TRUE(f.flipped);
  EXPECT_EQ(f.source_t, p.source_t);
}

TEST(FlipPair, IsAnInvolution) {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const FramePair p = random_pair(rng, 9, 7);
    EXPECT_EQ(flip_pair(flip_pair(p)), p);
  }
}

TEST(PairAt, RangeChecked) {
  const Sequence seq = ft::constant_sequence(3, 16, 16, 0.1);
  EXPECT_EQ(pair_at(seq, 1).source_t, 1u);
  EXPECT_EQ(pair_at(seq, 2).after.t, 2u);
  EXPECT_THROW(pair_at(seq, 0), Error);
  EXPECT_THROW(pair_at(seq, 3), Error);
}

// Crop bank

TEST(CropBank, OneUsableEventGivesOne40x40Crop) {
  Rng rng(3);
  const Sequence seq = ft::random_sequence(rng, 3, 100, 90);
  const AnnotationSet labels{"s", {{2, 50.0, 45.0}}};
  const auto bank = build_crop_bank(seq, labels, 40);
  ASSERT_EQ(bank.size(), 1u);
  EXPECT_EQ(bank[0].size, 40u);
  EXPECT_EQ(bank[0].before_patch.width, 40u);
  EXPECT_EQ(bank[0].after_patch.height, 40u);
  // Window [c - 20, c + 20) of the pair (t-1, t).
  EXPECT_EQ(bank[0].before_patch.at(0, 0), seq.frames[1].image.at(30, 25));
  EXPECT_EQ(bank[0].after_patch.at(39, 39), seq.frames[2].image.at(69, 64));
  EXPECT_EQ(bank[0].after_patch.at(20, 20), seq.frames[2].image.at(50, 45));
}

TEST(CropBank, BorderEventIsSkipped) {
  const Sequence seq = ft::constant_sequence(3, 100, 100, 0.3);
  std::vector<MitosisEvent> skipped;
  const AnnotationSet labels{"s", {{1, 5.0, 5.0}, {1, 50.0, 50.0}, {0, 50.0, 50.0}}};
  const auto bank = build_crop_bank(seq, labels, 40, &skipped);
  EXPECT_EQ(bank.size(), 1u);
  EXPECT_EQ(skipped.size(), 2u);
}

TEST(CropBank, ClearanceBoundary) {
  const Sequence seq = ft::constant_sequence(2, 100, 100, 0.3);
  // s/2 = 20: centers 20..79 fit, 19 and 80 do not.
  EXPECT_EQ(build_crop_bank(seq, {"s", {{1, 20.0, 79.0}}}, 40).size(), 1u);
  EXPECT_EQ(build_crop_bank(seq, {"s", {{1, 19.0, 50.0}}}, 40).size(), 0u);
  EXPECT_EQ(build_crop_bank(seq, {"s", {{1, 50.0, 80.0}}}, 40).size(), 0u);
}

TEST(CropBank, ConstantSequenceGivesConstantPatches) {
  const Sequence seq = ft::constant_sequence(4, 64, 64, 0.42);
  const auto bank = build_crop_bank(seq, {"s", {{2, 30.0, 30.0}, {3, 33.4, 31.6}}}, 40);
  ASSERT_EQ(bank.size(), 2u);
  for (const auto &c : bank) {
    for (double v : c.before_patch.values)
      ASSERT_EQ(v, 0.42);
    for (double v : c.after_patch.values)
      ASSERT_EQ(v, 0.42);
  }
}

TEST(CropBank, EmptyWhenNothingUsable) {
  const Sequence seq = ft::constant_sequence(3, 32, 32, 0.1);
  EXPECT_TRUE(build_crop_bank(seq, {"s", {{1, 16.0, 16.0}}}, 40).empty());
}

// Blend mask

TEST(BlendMask, CenterIsOneAndCornerIsLower) {
  const BlendMask m = make_blend_mask(40, 10, 4);
  EXPECT_DOUBLE_EQ(m.alpha.at(20, 20), 1.0);
  EXPECT_LT(m.alpha.at(0, 0), m.alpha.at(20, 20));
  EXPECT_EQ(*std::max_element(m.alpha.values.begin(), m.alpha.values.end()), 1.0);
  EXPECT_EQ(m.sigma, 4.0);
}

TEST(BlendMask, MatchesDenseConvolutionOracle) {
  const Grid oracle = ft::dense_blend_mask(40, 10, 4);
  const BlendMask m = make_blend_mask(40, 10, 4);
  // Distance 20 from the center along x is the first column; the far side
  // reaches only 19.
  EXPECT_NEAR(m.alpha.at(0, 20), oracle.at(0, 20), 1e-6);
  EXPECT_NEAR(m.alpha.at(39, 20), oracle.at(39, 20), 1e-6);
  for (std::size_t i = 0; i < oracle.values.size(); ++i)
    ASSERT_NEAR(m.alpha.values[i], oracle.values[i], 1e-9) << i;
}

TEST(BlendMask, OracleAgreesAcrossParameters) {
  for (double sigma : {1.0, 2.5, 8.0})
    for (double r : {4.0, 10.0, 15.5}) {
      const Grid oracle = ft::dense_blend_mask(40, r, sigma);
      const BlendMask m = make_blend_mask(40, r, sigma);
      for (std::size_t i = 0; i < oracle.values.size(); ++i)
        ASSERT_NEAR(m.alpha.values[i], oracle.values[i], 1e-9);
    }
}

TEST(BlendMask, SymmetricUnderQuarterTurn) {
  // Rotation about pixel (20, 20): (x, y) -> (40 - y, x) stays inside for
  // x, y in [1, 39].
  const BlendMask m = make_blend_mask(40, 10, 3);
  for (std::uint32_t y = 1; y < 40; ++y)
    for (std::uint32_t x = 1; x < 40; ++x)
      ASSERT_NEAR(m.alpha.at(x, y), m.alpha.at(40 - y, x), 1e-12);
}

TEST(BlendMask, RejectsBadParameters) {
  EXPECT_THROW(make_blend_mask(40, 0, 4), Error);
  EXPECT_THROW(make_blend_mask(40, 20, 4), Error);
  EXPECT_THROW(make_blend_mask(40, 10, 0), Error);
}

// Paste

TEST(PasteEvent, ZeroAlphaIsIdentity) {
  Rng rng(4);
  const FramePair p = random_pair(rng, 64, 64);
  const BlendMask zero{Grid(40, 40, 0.0), 1.0};
  const CropPair crop{ft::random_grid(rng, 40, 40), ft::random_grid(rng, 40, 40), {}, 40};
  EXPECT_EQ(paste_event(p, crop, zero, {32, 32}, PasteMode::Alpha), p);
}

TEST(PasteEvent, FullAlphaAtCenterCopiesCrop) {
  Rng rng(5);
  const FramePair p = random_pair(rng, 64, 64);
  const CropPair crop{ft::random_grid(rng, 40, 40), ft::random_grid(rng, 40, 40), {}, 40};
  const FramePair out =
      paste_event(p, crop, make_blend_mask(40, 10, 4), {30, 33}, PasteMode::Alpha);
  EXPECT_EQ(out.before.image.at(30, 33), crop.before_patch.at(20, 20));
  EXPECT_EQ(out.after.image.at(30, 33), crop.after_patch.at(20, 20));
}

TEST(PasteEvent, HalfAlphaArithmetic) {
  const FramePair p{{0, Grid(50, 50, 0.2)}, {1, Grid(50, 50, 0.2)}, 1, false};
  const BlendMask half{Grid(40, 40, 0.5), 1.0};
  const FramePair out = paste_event(p, constant_crop(40, 0.6, 0.6), half, {25, 25},
                                    PasteMode::Alpha);
  EXPECT_NEAR(out.before.image.at(25, 25), 0.4, 1e-15);
  EXPECT_NEAR(out.after.image.at(5, 5), 0.4, 1e-15);
  EXPECT_EQ(out.after.image.at(4, 5), 0.2);
}

TEST(PasteEvent, OnlyTheWindowChanges) {
  Rng rng(6);
  const FramePair p = random_pair(rng, 80, 70);
  const CropPair crop{ft::random_grid(rng, 40, 40), ft::random_grid(rng, 40, 40), {}, 40};
  for (PasteMode mode : {PasteMode::Alpha, PasteMode::Direct}) {
    const FramePair out = paste_event(p, crop, make_blend_mask(40, 10, 5), {41, 33}, mode);
    for (std::uint32_t y = 0; y < 70; ++y)
      for (std::uint32_t x = 0; x < 80; ++x) {
        const bool inside = x >= 21 && x < 61 && y >= 13 && y < 53;
        if (!inside) {
          ASSERT_EQ(out.before.image.at(x, y), p.before.image.at(x, y));
          ASSERT_EQ(out.after.image.at(x, y), p.after.image.at(x, y));
        } else if (mode == PasteMode::Direct) {
          ASSERT_EQ(out.before.image.at(x, y), crop.before_patch.at(x - 21, y - 13));
        }
      }
  }
}

TEST(PasteEvent, AlphaOutputIsConvex) {
  Rng rng(7);
  const FramePair p = random_pair(rng, 60, 60);
  const CropPair crop{ft::random_grid(rng, 40, 40), ft::random_grid(rng, 40, 40), {}, 40};
  const FramePair out =
      paste_event(p, crop, make_blend_mask(40, 9, 3), {30, 30}, PasteMode::Alpha);
  for (std::uint32_t y = 0; y < 40; ++y)
    for (std::uint32_t x = 0; x < 40; ++x) {
      const double t = p.before.image.at(x + 10, y + 10);
      const double c = crop.before_patch.at(x, y);
      const double v = out.before.image.at(x + 10, y + 10);
      ASSERT_GE(v, std::min(t, c));
      ASSERT_LE(v, std::max(t, c));
    }
}

TEST(PasteEvent, OutOfBoundsCenter) {
  const FramePair p{{0, Grid(64, 64, 0.1)}, {1, Grid(64, 64, 0.1)}, 1, false};
  const BlendMask m = make_blend_mask(40, 10, 4);
  const CropPair crop = constant_crop(40, 0.5, 0.5);
  EXPECT_NO_THROW(paste_event(p, crop, m, {20, 43}, PasteMode::Alpha));
  for (PixelPoint c : {PixelPoint{19, 30}, PixelPoint{44, 30}, PixelPoint{30, 19},
                       PixelPoint{30, 44}, PixelPoint{-5, 30}}) {
    try {
      paste_event(p, crop, m, c, PasteMode::Alpha);
      ADD_FAILURE() << "center " << c.x << "," << c.y << " accepted";
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::OutOfBounds);
    }
  }
}

// Pair generation

TEST(GeneratePair, PropertiesHoldOverManySeeds) {
  const SimResult sim = busy_simulation();
  const auto bank = build_crop_bank(sim.sequence, sim.ground_truth, 40);
  ASSERT_FALSE(bank.empty());
  GenConfig cfg;
  std::size_t max_k = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const LabeledPair lp = generate_pair(sim.sequence, 5, bank, cfg, seed);
    ASSERT_GE(lp.events.size(), 1u);
    ASSERT_LE(lp.events.size(), 10u);
    ASSERT_EQ(lp.events.size(), lp.crop_ids.size());
    ASSERT_TRUE(lp.pair.flipped);
    max_k = std::max(max_k, lp.events.size());
    for (std::size_t i = 0; i < lp.events.size(); ++i) {
      const auto &e = lp.events[i];
      ASSERT_GE(e.x, 20);
      ASSERT_GE(e.y, 20);
      ASSERT_LE(e.x, 127 - 20);
      ASSERT_LE(e.y, 127 - 20);
      ASSERT_LT(lp.crop_ids[i], bank.size());
      for (std::size_t j = 0; j < i; ++j) {
        const double dx = static_cast<double>(e.x - lp.events[j].x);
        const double dy = static_cast<double>(e.y - lp.events[j].y);
        ASSERT_GE(std::hypot(dx, dy), 40.0);
      }
    }
  }
  EXPECT_GE(max_k, 3u);
}

TEST(GeneratePair, Deterministic) {
  const SimResult sim = busy_simulation();
  const auto bank = build_crop_bank(sim.sequence, sim.ground_truth, 40);
  const LabeledPair a = generate_pair(sim.sequence, 3, bank, {}, 99);
  const LabeledPair b = generate_pair(sim.sequence, 3, bank, {}, 99);
  EXPECT_EQ(a.pair, b.pair);
  EXPECT_EQ(a.events, b.events);
  EXPECT_EQ(a.crop_ids, b.crop_ids);
}

TEST(GeneratePair, PastedWindowsCorrelateWithSourceCrops) {
  // Compared over the mask's disk. The outer ring of the window is mostly
  // target background, so neighbouring cells there carry no signal.
  const SimResult sim = busy_simulation();
  const auto bank = build_crop_bank(sim.sequence, sim.ground_truth, 40);
  ASSERT_GE(bank.size(), 2u);
  const GenConfig cfg;
  auto disk = [&](const std::vector<double> &w) {
    std::vector<double> out;
    const double r = cfg.disk_radius();
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 40; ++x)
        if ((x - 20) * (x - 20) + (y - 20) * (y - 20) <= r * r)
          out.push_back(w[static_cast<std::size_t>(y * 40 + x)]);
    return out;
  };
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LabeledPair lp = generate_pair(sim.sequence, 6, bank, cfg, seed);
    for (std::size_t i = 0; i < lp.events.size(); ++i) {
      const CropPair &crop = bank[lp.crop_ids[i]];
      const auto &e = lp.events[i];
      EXPECT_GT(ft::pearson(disk(ft::window(lp.pair.before.image, e.x, e.y, 40)),
                            disk(crop.before_patch.values)),
                0.5);
      EXPECT_GT(ft::pearson(disk(ft::window(lp.pair.after.image, e.x, e.y, 40)),
                            disk(crop.after_patch.values)),
                0.5);
      ++checked;
    }
  }
  EXPECT_GT(checked, 20u);
}

TEST(GeneratePair, UnpastedPixelsComeFromTheFlippedPair) {
  const SimResult sim = busy_simulation();
  const auto bank = build_crop_bank(sim.sequence, sim.ground_truth, 40);
  GenConfig cfg;
  cfg.k_min = cfg.k_max = 1;
  const LabeledPair lp = generate_pair(sim.sequence, 4, bank, cfg, 5);
  ASSERT_EQ(lp.events.size(), 1u);
  const auto &e = lp.events[0];
  EXPECT_EQ(lp.pair.before.t, 4u);
  EXPECT_EQ(lp.pair.after.t, 3u);
  const std::uint32_t x = e.x >= 64 ? 0 : 127;
  EXPECT_EQ(lp.pair.before.image.at(x, 0), sim.sequence.frames[4].image.at(x, 0));
  EXPECT_EQ(lp.pair.after.image.at(x, 0), sim.sequence.frames[3].image.at(x, 0));
}

TEST(GeneratePair, EmptyBankThrows) {
  const Sequence seq = ft::constant_sequence(3, 64, 64, 0.1);
  try {
    generate_pair(seq, 1, {}, {}, 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyBank);
  }
}

TEST(GeneratePair, PlacementGivesUpWhenCrowded) {
  // 80x80 leaves a 40x40 range of centers; at most four fit 40 px apart.
  const SimResult sim = busy_simulation();
  const auto bank = build_crop_bank(sim.sequence, sim.ground_truth, 40);
  Sequence small = ft::constant_sequence(3, 80, 80, 0.2);
  GenConfig cfg;
  cfg.k_min = cfg.k_max = 10;
  const LabeledPair lp = generate_pair(small, 1, bank, cfg, 3);
  EXPECT_GE(lp.events.size(), 1u);
  EXPECT_LE(lp.events.size(), 4u);
}

TEST(GenConfig, Validation) {
  GenConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.k_min = 5;
  cfg.k_max = 4;
  EXPECT_THROW(validate(cfg), Error);
  cfg = {};
  cfg.crop_size = 41;
  EXPECT_THROW(validate(cfg), Error);
  cfg = {};
  cfg.mask_sigma_min = 9;
  EXPECT_THROW(validate(cfg), Error);
  cfg = {};
  cfg.mask_disk_radius = 25;
  EXPECT_THROW(validate(cfg), Error);
  EXPECT_EQ(paste_mode_from_string("direct"), PasteMode::Direct);
  EXPECT_THROW(paste_mode_from_string("cutmix"), Error);
}

// Dataset writer

TEST(GenerateDataset, FiveFramesGiveFourPairs) {
  Rng rng(8);
  const Sequence seq = ft::random_sequence(rng, 5, 96, 96);
  ft::TempDir dir("ds5");
  const auto manifest =
      generate_dataset(seq, {"rand", {{2, 48.0, 48.0}}}, {}, dir / "ds", {2});
  EXPECT_EQ(manifest["pairs"].size(), 4u);
  EXPECT_EQ(manifest["format_version"], "flipforge-dataset-v1");
  for (std::uint32_t t = 1; t <= 4; ++t) {
    const auto pd = dir / "ds" / "pairs" / pair_dir_name(t);
    EXPECT_TRUE(std::filesystem::exists(pd / "before.png"));
    EXPECT_TRUE(std::filesystem::exists(pd / "after.png"));
    EXPECT_TRUE(std::filesystem::exists(pd / "events.json"));
  }
  const AnnotationSet events = load_dataset_events(dir / "ds");
  for (const auto &e : events.events) {
    EXPECT_GE(e.x, 20.0);
    EXPECT_GE(e.y, 20.0);
    EXPECT_LE(e.x, 95.0 - 20.0);
    EXPECT_LE(e.y, 95.0 - 20.0);
    EXPECT_GE(e.t, 1u);
    EXPECT_LE(e.t, 4u);
  }
}

TEST(GenerateDataset, ByteIdenticalAcrossRunsAndThreadCounts) {
  const SimResult sim = busy_simulation();
  GenConfig cfg;
  cfg.seed = 12;
  ft::TempDir dir("dsdet");
  generate_dataset(sim.sequence, sim.ground_truth, cfg, dir / "a", {1});
  generate_dataset(sim.sequence, sim.ground_truth, cfg, dir / "b", {4});
  const auto a = ft::hash_tree(dir / "a");
  EXPECT_EQ(a.size(), 1 + 3 * (sim.sequence.size() - 1));
  EXPECT_EQ(a, ft::hash_tree(dir / "b"));
  cfg.seed = 13;
  generate_dataset(sim.sequence, sim.ground_truth, cfg, dir / "c", {4});
  EXPECT_NE(a, ft::hash_tree(dir / "c"));
}

TEST(GenerateDataset, WrittenPairsMatchGeneratePair) {
  const SimResult sim = busy_simulation();
  GenConfig cfg;
  cfg.seed = 4;
  ft::TempDir dir("dsmatch");
  generate_dataset(sim.sequence, sim.ground_truth, cfg, dir.path(), {2});
  const auto bank = build_crop_bank(sim.sequence, sim.ground_truth, 40);
  const LabeledPair lp = generate_pair(sim.sequence, 7, bank, cfg, pair_seed(cfg.seed, 7));
  const auto pd = dir / "pairs" / pair_dir_name(7);
  Grid before = lp.pair.before.image;
  quantize_to_u16(before);
  EXPECT_EQ(read_png16(pd / "before.png"), before);
  const auto ev = nlohmann::json::parse(read_text_file(pd / "events.json"));
  EXPECT_EQ(ev["events"].size(), lp.events.size());
  EXPECT_EQ(ev["source_t"], 7);
}

TEST(GenerateDataset, NoUsableLabelIsAnError) {
  const Sequence seq = ft::constant_sequence(3, 64, 64, 0.1);
  ft::TempDir dir("dsempty");
  try {
    generate_dataset(seq, {"c", {{1, 2.0, 2.0}}}, {}, dir.path());
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyBank);
  }
}

TEST(GenerateDataset, VersionMismatchRejectedOnLoad) {
  ft::TempDir dir("dsver");
  write_text_file(dir / "manifest.json", R"({"format_version":"other","pairs":[]})");
  try {
    load_dataset_events(dir.path());
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedVersion);
  }
}

// Label subsampling

namespace {

AnnotationSet numbered_events(std::size_t n) {
  AnnotationSet a{"n", {}};
  for (std::size_t i = 0; i < n; ++i)
    a.events.push_back({static_cast<std::uint32_t>(1 + i), 10.0 + i, 20.0});
  return a;
}

} // namespace

TEST(SampleLabels, FiveShotOfThirtyThree) {
  const AnnotationSet all = numbered_events(33);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const AnnotationSet kept = sample_partial_labels(all, SampleMode::n_shot(5), seed);
    ASSERT_EQ(kept.size(), 5u);
    for (std::size_t i = 1; i < kept.size(); ++i)
      EXPECT_LT(kept.events[i - 1].t, kept.events[i].t);
    for (const auto &e : kept.events)
      EXPECT_NE(std::find(all.events.begin(), all.events.end(), e), all.events.end());
  }
  EXPECT_EQ(sample_partial_labels(all, SampleMode::n_shot(40), 1), all);
}

TEST(SampleLabels, NShotIsRoughlyUniform) {
  const AnnotationSet all = numbered_events(10);
  std::vector<int> hits(10, 0);
  for (std::uint64_t seed = 0; seed < 5000; ++seed)
    for (const auto &e : sample_partial_labels(all, SampleMode::n_shot(1), seed).events)
      ++hits[e.t - 1];
  for (int h : hits)
    EXPECT_NEAR(h, 500, 100);
}

TEST(SampleLabels, MissingRateEndpoints) {
  const AnnotationSet all = numbered_events(33);
  EXPECT_EQ(sample_partial_labels(all, SampleMode::missing_rate(0.0), 3), all);
  EXPECT_EQ(sample_partial_labels(all, SampleMode::missing_rate(1.0), 3).size(), 0u);
}

TEST(SampleLabels, DeterministicGivenSeed) {
  const AnnotationSet all = numbered_events(50);
  EXPECT_EQ(sample_partial_labels(all, SampleMode::missing_rate(0.3), 8),
            sample_partial_labels(all, SampleMode::missing_rate(0.3), 8));
  EXPECT_EQ(sample_partial_labels(all, SampleMode::n_shot(5), 8),
            sample_partial_labels(all, SampleMode::n_shot(5), 8));
}

TEST(SampleLabels, MissingRateMatchesReferenceDraws) {
  // From tests/reference/sim_reference.py: missing_rate_keep(1000, 0.3, 42).
  const AnnotationSet all = numbered_events(1000);
  EXPECT_EQ(sample_partial_labels(all, SampleMode::missing_rate(0.3), 42).size(),
            677u);
}
