#include "veil/pipe/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "veil/img/png_io.hpp"
#include "veil/occ/field.hpp"
#include "veil/occ/render.hpp"

namespace veil::pipe {

namespace fs = std::filesystem;

img::Image make_scene(int height, int width, uint64_t seed) {
    Rng rng(seed);
    img::Image im = img::Image::create(height, width, 3);
    double tl[3], br[3];
    for (int c = 0; c < 3; ++c) {
        tl[c] = rng.uniform(0.15, 0.85);
        br[c] = rng.uniform(0.15, 0.85);
    }
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double t = (x / double(width - 1) + y / double(height - 1)) * 0.5;
            for (int c = 0; c < 3; ++c) im.at(c, y, x) = tl[c] + t * (br[c] - tl[c]);
        }

    const int n_shapes = rng.uniform_int(6, 10);
    for (int s = 0; s < n_shapes; ++s) {
        const int kind = rng.uniform_int(0, 2);
        double color[3];
        for (int c = 0; c < 3; ++c) color[c] = rng.uniform(0.05, 0.95);
        if (kind == 0) {  // rectangle
            const int x0 = rng.uniform_int(0, width - 6);
            const int y0 = rng.uniform_int(0, height - 6);
            const int x1 = std::min(width - 1, x0 + rng.uniform_int(4, width / 2));
            const int y1 = std::min(height - 1, y0 + rng.uniform_int(4, height / 2));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    for (int c = 0; c < 3; ++c) im.at(c, y, x) = color[c];
        } else if (kind == 1) {  // disc
            const double cx = rng.uniform(4.0, width - 4.0);
            const double cy = rng.uniform(4.0, height - 4.0);
            const double r = rng.uniform(3.0, std::min(height, width) / 4.0);
            const int x0 = std::max(0, static_cast<int>(cx - r) - 1);
            const int x1 = std::min(width - 1, static_cast<int>(cx + r) + 1);
            const int y0 = std::max(0, static_cast<int>(cy - r) - 1);
            const int y1 = std::min(height - 1, static_cast<int>(cy + r) + 1);
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double dx = x - cx, dy = y - cy;
                    if (dx * dx + dy * dy <= r * r)
                        for (int c = 0; c < 3; ++c) im.at(c, y, x) = color[c];
                }
        } else {  // horizontal stripe
            const int y0 = rng.uniform_int(0, height - 3);
            const int hgt = rng.uniform_int(2, std::max(2, height / 8));
            const int y1 = std::min(height - 1, y0 + hgt);
            for (int y = y0; y <= y1; ++y)
                for (int x = 0; x < width; ++x)
                    for (int c = 0; c < 3; ++c) im.at(c, y, x) = color[c];
        }
    }
    return im;
}

img::Image apply_style(const img::Image& x, const std::string& style_id, double strength) {
    if (style_id == "none") return x;
    // fixed affine recipe scaled by strength
    const double gain[3] = {1.0 - 0.32 * strength, 1.0 - 0.15 * strength,
                            1.0 + 0.08 * strength};
    const double bias[3] = {0.03 * strength, 0.01 * strength, 0.08 * strength};
    const double vgrad = 0.30 * strength;

    img::Image out = x;
    if (style_id == "affine_vgrad") {
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < x.height; ++y) {
                const double ramp = vgrad * (y / double(x.height - 1) - 0.5);
                for (int xx = 0; xx < x.width; ++xx)
                    out.at(c, y, xx) =
                        std::clamp(gain[c] * x.at(c, y, xx) + bias[c] + ramp, 0.0, 1.0);
            }
        return out;
    }
    if (style_id == "affine_tophalf") {
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < x.height / 2; ++y)
                for (int xx = 0; xx < x.width; ++xx)
                    out.at(c, y, xx) =
                        std::clamp(gain[c] * x.at(c, y, xx) + bias[c], 0.0, 1.0);
        return out;
    }
    throw RangeError("unknown style transform: " + style_id);
}

namespace {

struct ManifestWriter {
    std::ofstream f;
    explicit ManifestWriter(const fs::path& p) : f(p) {
        if (!f) throw IoError("cannot write manifest: " + p.string());
    }
    void add(const std::string& rel) { f << rel << "\n"; }
};

img::Map2D render_target(const Config& cfg, const img::Image& styled, uint64_t field_seed,
                         img::Image* out) {
    if (cfg.occlusion.p_r == 0.0) {
        *out = styled;
        return img::Map2D::create(styled.height, styled.width, 1.0);
    }
    const occ::DropField field =
        occ::sample_drop_field(field_seed, styled.height, styled.width, cfg.occlusion);
    occ::PhysicalParams params{cfg.occlusion.kind, cfg.synthetic.sigma_star};
    const occ::OcclusionRender render =
        occ::render_occlusions(styled, field, params, cfg.occlusion, field_seed);
    *out = occ::composite(styled, render);
    return render.alpha;
}

}  // namespace

uint64_t eval_field_seed(uint64_t dataset_seed, int index) {
    return derive_seed(dataset_seed, 40000 + static_cast<uint64_t>(index));
}

void make_synthetic_dataset(const Config& cfg, const std::string& out_root) {
    const fs::path root(out_root);
    for (const char* d :
         {"source", "target", "gt_style", "gt_masks", "eval_source", "eval_target"})
        fs::create_directories(root / d);

    const auto& sp = cfg.synthetic;
    char name[64];

    ManifestWriter m_src(root / cfg.data.train_source);
    for (int i = 0; i < sp.n_train_source; ++i) {
        std::snprintf(name, sizeof(name), "source/%05d.png", i);
        img::save_png((root / name).string(),
                      make_scene(sp.height, sp.width, derive_seed(sp.seed, i)));
        m_src.add(name);
    }

    ManifestWriter m_tgt(root / cfg.data.train_target);
    for (int i = 0; i < sp.n_train_target; ++i) {
        const img::Image scene =
            make_scene(sp.height, sp.width, derive_seed(sp.seed, 10000 + i));
        const img::Image styled = apply_style(scene, sp.style, sp.style_strength);
        img::Image target;
        const img::Map2D alpha =
            render_target(cfg, styled, derive_seed(sp.seed, 20000 + i), &target);
        std::snprintf(name, sizeof(name), "target/%05d.png", i);
        img::save_png((root / name).string(), target);
        m_tgt.add(name);
        std::snprintf(name, sizeof(name), "gt_style/target_%05d.png", i);
        img::save_png((root / name).string(), styled);
        std::snprintf(name, sizeof(name), "gt_masks/target_%05d.png", i);
        img::save_png((root / name).string(), alpha);
    }

    ManifestWriter m_esrc(root / cfg.data.eval_source);
    ManifestWriter m_esty(root / cfg.data.eval_gt_style);
    ManifestWriter m_emask(root / cfg.data.eval_gt_mask);
    ManifestWriter m_etgt(root / cfg.data.eval_target);
    for (int i = 0; i < sp.n_eval; ++i) {
        const img::Image scene =
            make_scene(sp.height, sp.width, derive_seed(sp.seed, 30000 + i));
        const img::Image styled = apply_style(scene, sp.style, sp.style_strength);
        img::Image target;
        const img::Map2D alpha = render_target(cfg, styled, eval_field_seed(sp.seed, i), &target);

        std::snprintf(name, sizeof(name), "eval_source/%05d.png", i);
        img::save_png((root / name).string(), scene);
        m_esrc.add(name);
        std::snprintf(name, sizeof(name), "gt_style/eval_%05d.png", i);
        img::save_png((root / name).string(), styled);
        m_esty.add(name);
        std::snprintf(name, sizeof(name), "gt_masks/eval_%05d.png", i);
        img::save_png((root / name).string(), alpha);
        m_emask.add(name);
        std::snprintf(name, sizeof(name), "eval_target/%05d.png", i);
        img::save_png((root / name).string(), target);
        m_etgt.add(name);
    }

    nlohmann::json meta;
    meta["seed"] = sp.seed;
    meta["sigma_star"] = sp.sigma_star;
    meta["style"] = sp.style;
    meta["style_strength"] = sp.style_strength;
    meta["height"] = sp.height;
    meta["width"] = sp.width;
    meta["occlusion_kind"] = occ::kind_to_string(cfg.occlusion.kind);
    meta["config_hash"] = cfg.hash;
    std::vector<uint64_t> seeds;
    for (int i = 0; i < sp.n_eval; ++i) seeds.push_back(eval_field_seed(sp.seed, i));
    meta["eval_field_seeds"] = seeds;
    std::ofstream f(root / "meta.json");
    if (!f) throw IoError("cannot write dataset meta: " + (root / "meta.json").string());
    f << meta.dump(2) << "\n";
}

std::vector<std::string> load_manifest(const std::string& root, const std::string& manifest) {
    const fs::path path = fs::path(root) / manifest;
    std::ifstream f(path);
    if (!f) throw IoError("cannot read manifest: " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back((fs::path(root) / line).string());
    }
    check(!out.empty(), "manifest is empty: " + path.string());
    return out;
}

std::vector<img::Image> load_images(const std::vector<std::string>& paths) {
    std::vector<img::Image> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(img::load_png(p));
    return out;
}

std::vector<img::Image> load_dataset(const std::string& root, const std::string& manifest,
                                     int limit) {
    auto paths = load_manifest(root, manifest);
    if (limit > 0 && static_cast<int>(paths.size()) > limit)
        paths.resize(static_cast<size_t>(limit));
    return load_images(paths);
}

}  // namespace veil::pipe
