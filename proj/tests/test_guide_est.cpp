#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "veil/core/common.hpp"
#include "veil/est/estimate.hpp"
#include "veil/guide/guidance.hpp"
#include "veil/occ/field.hpp"

using namespace veil;
using img::Image;
using img::Map2D;

namespace {

Image random_image(Rng& rng, int h, int w) {
    Image im = Image::create(h, w, 3);
    for (double& x : im.data) x = rng.uniform();
    return im;
}

void zero_blob(net::Discriminator& d, const std::string& name) {
    for (auto& b : d.params())
        if (b.name == name) std::fill(b.value->begin(), b.value->end(), 0.0);
}

std::filesystem::path temp_dir() {
    auto p = std::filesystem::temp_directory_path() / "veil_guide_tests";
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("constant discriminator output yields an all-zero heatmap") {
    Rng rng(1);
    net::Discriminator d({4, 2}, 3);
    for (int s = 0; s < 2; ++s) {
        zero_blob(d, "d.s" + std::to_string(s) + ".head.weight");
        zero_blob(d, "d.s" + std::to_string(s) + ".head.bias");
    }
    const Image x = random_image(rng, 32, 32);
    for (const auto& layer : d.layer_registry()) {
        const Map2D heat = guide::gradcam_layer(d, x, layer);
        for (double v : heat.v) CHECK(v == 0.0);
    }
}

TEST_CASE("gradcam on a single-channel toy head follows the chain rule") {
    Rng rng(2);
    net::Discriminator d({4, 2}, 5);
    // Head score map = -act3 channel 0 (single center tap), so the fake-class
    // scalar is +mean(act3 channel 0).
    for (auto& b : d.params()) {
        if (b.name == "d.s0.head.weight") {
            std::fill(b.value->begin(), b.value->end(), 0.0);
            (*b.value)[0 * 9 + 4] = -1.0;  // channel 0, center of the 3x3 tap
        } else if (b.name == "d.s0.head.bias") {
            std::fill(b.value->begin(), b.value->end(), 0.0);
        }
    }
    const Image x = random_image(rng, 32, 32);
    const Map2D heat = guide::gradcam_layer(d, x, "s0.l3");

    d.forward(net::Tensor::from_image(x));
    const net::Tensor& act = d.activation("s0.l3");
    Map2D expect = Map2D::create(act.h, act.w);
    const double n = static_cast<double>(act.plane());
    for (size_t i = 0; i < expect.v.size(); ++i)
        expect.v[i] = std::max(0.0, act.plane_ptr(0)[i]) / n;
    const Map2D up = guide::resize_bilinear(expect, 32, 32);
    for (size_t i = 0; i < heat.v.size(); ++i)
        CHECK(heat.v[i] == doctest::Approx(up.v[i]).epsilon(1e-12));
}

TEST_CASE("gradcam heatmaps are non-negative for random nets and inputs") {
    Rng rng(4);
    net::Discriminator d({4, 2}, 7);
    const Image x = random_image(rng, 32, 32);
    for (const auto& layer : d.layer_registry()) {
        const Map2D heat = guide::gradcam_layer(d, x, layer);
        CHECK(*std::min_element(heat.v.begin(), heat.v.end()) >= 0.0);
    }
}

TEST_CASE("degenerate DG normalizes to all-zeros") {
    Rng rng(5);
    net::Discriminator d({4, 2}, 9);
    for (int s = 0; s < 2; ++s) {
        zero_blob(d, "d.s" + std::to_string(s) + ".head.weight");
        zero_blob(d, "d.s" + std::to_string(s) + ".head.bias");
    }
    const std::vector<Image> dataset{random_image(rng, 32, 32)};
    const guide::GuidanceMap dg = guide::compute_dg(d, dataset);
    for (double v : dg.dg.v) CHECK(v == 0.0);
}

TEST_CASE("two-image DG is the pixelwise mean of single-image maps before normalization") {
    Rng rng(6);
    net::Discriminator d({4, 2}, 11);
    const std::vector<Image> dataset{random_image(rng, 32, 32), random_image(rng, 32, 32)};
    const guide::GuidanceMap dg = guide::compute_dg(d, dataset);

    Map2D manual = Map2D::create(32, 32, 0.0);
    for (const Image& x : dataset) {
        Map2D per = Map2D::create(32, 32, 0.0);
        for (const auto& layer : d.layer_registry()) {
            Map2D heat = guide::gradcam_layer(d, x, layer);
            guide::minmax_normalize(heat);
            for (size_t i = 0; i < per.v.size(); ++i) per.v[i] += heat.v[i];
        }
        for (size_t i = 0; i < manual.v.size(); ++i)
            manual.v[i] += per.v[i] / d.layer_registry().size();
    }
    for (double& v : manual.v) v /= dataset.size();
    guide::minmax_normalize(manual);
    for (size_t i = 0; i < manual.v.size(); ++i)
        CHECK(dg.dg.v[i] == doctest::Approx(manual.v[i]).epsilon(1e-12));
}

TEST_CASE("DG is invariant to dataset ordering") {
    Rng rng(7);
    net::Discriminator d({4, 2}, 13);
    std::vector<Image> dataset{random_image(rng, 32, 32), random_image(rng, 32, 32),
                               random_image(rng, 32, 32)};
    const guide::GuidanceMap a = guide::compute_dg(d, dataset);
    std::rotate(dataset.begin(), dataset.begin() + 1, dataset.end());
    const guide::GuidanceMap b = guide::compute_dg(d, dataset);
    for (size_t i = 0; i < a.dg.v.size(); ++i)
        CHECK(a.dg.v[i] == doctest::Approx(b.dg.v[i]).epsilon(1e-12));
}

TEST_CASE("injection mask thresholds and monotonicity") {
    Map2D dg = Map2D::create(8, 8);
    Rng rng(8);
    for (double& v : dg.v) v = rng.uniform();
    guide::minmax_normalize(dg);

    const Map2D m0 = guide::injection_mask_map(dg, 0.0);
    for (double v : m0.v) CHECK(v == 0.0);

    const Map2D m1 = guide::injection_mask_map(dg, 1.0);
    for (size_t i = 0; i < dg.v.size(); ++i) CHECK(m1.v[i] == (dg.v[i] < 1.0 ? 1.0 : 0.0));
    CHECK(std::count(m1.v.begin(), m1.v.end(), 0.0) >= 1);  // the max pixel stays false

    double prev_count = -1.0;
    for (double beta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const Map2D m = guide::injection_mask_map(dg, beta);
        const double count = std::count(m.v.begin(), m.v.end(), 1.0);
        CHECK(count >= prev_count);
        prev_count = count;
    }
    CHECK_THROWS_AS(guide::injection_mask_map(dg, 1.5), RangeError);
}

TEST_CASE("dg.bin round-trips through the 16-byte header format") {
    Map2D dg = Map2D::create(24, 17);
    Rng rng(9);
    for (double& v : dg.v) v = rng.uniform();
    const auto path = (temp_dir() / "dg.bin").string();
    guide::save_dg(path, dg);
    CHECK(std::filesystem::file_size(path) == 16 + dg.v.size() * 4);
    const Map2D back = guide::load_dg(path);
    REQUIRE(back.same_extent(dg));
    for (size_t i = 0; i < dg.v.size(); ++i)
        CHECK(back.v[i] == doctest::Approx(dg.v[i]).epsilon(1e-6));
}

TEST_CASE("estimation is deterministic, leaves the discriminator frozen, and traces") {
    Rng rng(10);
    net::Discriminator d({4, 2}, 15);
    std::vector<Image> sources;
    for (int i = 0; i < 3; ++i) sources.push_back(random_image(rng, 32, 32));

    occ::OcclusionConfig cfg;
    cfg.sigma_max = 6.0;
    est::EstimationConfig ecfg;
    ecfg.init_sigma = 2.0;
    ecfg.steps = 5;
    ecfg.batch = 2;
    ecfg.seed = 77;

    const uint64_t h0 = d.param_hash();
    const auto t1 = est::estimate_parameters(d, sources, occ::OcclusionKind::drop, cfg, ecfg);
    CHECK(d.param_hash() == h0);
    CHECK(t1.history.size() == 5);
    CHECK(t1.final_sigma > 0.0);
    CHECK(t1.final_sigma <= cfg.sigma_max);

    const auto t2 = est::estimate_parameters(d, sources, occ::OcclusionKind::drop, cfg, ecfg);
    CHECK(t1.final_sigma == t2.final_sigma);
    REQUIRE(t1.history.size() == t2.history.size());
    for (size_t i = 0; i < t1.history.size(); ++i) {
        CHECK(t1.history[i].first == t2.history[i].first);
        CHECK(t1.history[i].second == t2.history[i].second);
    }
}

TEST_CASE("non-finite losses abort estimation with the trace so far") {
    Rng rng(11);
    net::Discriminator d({4, 2}, 17);
    for (auto& b : d.params())
        if (b.name == "d.s0.head.bias") (*b.value)[0] = std::nan("");
    std::vector<Image> sources{random_image(rng, 32, 32)};
    occ::OcclusionConfig cfg;
    est::EstimationConfig ecfg;
    ecfg.steps = 4;
    ecfg.batch = 1;
    const auto t = est::estimate_parameters(d, sources, occ::OcclusionKind::drop, cfg, ecfg);
    CHECK(t.aborted_non_finite);
    CHECK(t.history.size() == 1);
}

TEST_CASE("photometric fit recovers a known sigma and grid search brackets it") {
    Rng rng(12);
    const Image clear = random_image(rng, 64, 64);
    occ::OcclusionConfig cfg;
    cfg.sigma_max = 8.0;
    const occ::DropField field = occ::sample_drop_field(123, 64, 64, cfg);
    REQUIRE_FALSE(field.drops.empty());
    const double sigma_star = 3.0;
    occ::PhysicalParams p{occ::OcclusionKind::drop, sigma_star};
    const Image occluded = occ::composite(clear, occ::render_raindrops(clear, field, p, cfg));

    std::vector<est::PhotometricPair> pairs{{&clear, &occluded, &field}};
    const est::PhotometricFit fit = est::fit_sigma_photometric(pairs, cfg, 1.0, 120, 0.25);
    CHECK(std::abs(fit.sigma - sigma_star) / sigma_star < 0.05);

    const double grid = est::grid_search_sigma_photometric(pairs, cfg, 0.5, 8.0, 0.5);
    CHECK(std::abs(grid - sigma_star) <= 0.5);
    CHECK(std::abs(fit.sigma - grid) <= 0.5 + 1e-9);
}

TEST_CASE("params file round trip") {
    const auto path = (temp_dir() / "params.json").string();
    est::save_params_file(path, occ::OcclusionKind::drop, 3.87, "cafe0123");
    const est::ParamsFile p = est::load_params_file(path);
    CHECK(p.kind == occ::OcclusionKind::drop);
    CHECK(p.sigma == doctest::Approx(3.87));
    CHECK(p.config_hash == "cafe0123");
}
