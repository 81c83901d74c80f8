#include "veil/occ/render.hpp"

#include <algorithm>
#include <cmath>

#include "veil/img/blur.hpp"
#include "veil/img/png_io.hpp"
#include "veil/kern/kernels.hpp"

namespace veil::occ {

namespace {

struct WindowBox {
    int x0, y0, x1, y1;  // inclusive, clipped to the image
    bool empty() const { return x1 < x0 || y1 < y0; }
    int w() const { return x1 - x0 + 1; }
    int h() const { return y1 - y0 + 1; }
};

WindowBox occluder_box(double cu, double cv, double reach, int img_h, int img_w) {
    WindowBox b;
    b.x0 = std::max(0, static_cast<int>(std::floor(cu - reach)));
    b.y0 = std::max(0, static_cast<int>(std::floor(cv - reach)));
    b.x1 = std::min(img_w - 1, static_cast<int>(std::ceil(cu + reach)));
    b.y1 = std::min(img_h - 1, static_cast<int>(std::ceil(cv + reach)));
    return b;
}

// Multiplies alpha (and maintains its sigma tangent) by (1 - blur(indicator))
// for one occluder, touching only the window where the blurred indicator is
// non-zero. The indicator is evaluated analytically at reflected coordinates,
// which reproduces the full-image reflective-border blur exactly.
template <class EvalFn>
void accumulate_blurred_occluder(img::Map2D& alpha, img::Map2D* alpha_ds,
                                 const img::GaussianKernel& k, int img_h, int img_w,
                                 double cu, double cv, double reach, EvalFn&& eval) {
    const int r = k.radius;
    const WindowBox box = occluder_box(cu, cv, reach + r, img_h, img_w);
    if (box.empty()) return;
    const int bw = box.w(), bh = box.h();
    const int qw = bw + 2 * r, qh = bh + 2 * r;

    std::vector<double> src(static_cast<size_t>(qh) * qw);
    for (int y = 0; y < qh; ++y) {
        const int iy = img::reflect_index(box.y0 - r + y, img_h);
        for (int x = 0; x < qw; ++x) {
            const int ix = img::reflect_index(box.x0 - r + x, img_w);
            src[static_cast<size_t>(y) * qw + x] = eval(iy, ix);
        }
    }

    const auto& kk = kern::active();
    const int n_taps = 2 * r + 1;
    const bool want_ds = alpha_ds != nullptr;

    std::vector<double> mid1(static_cast<size_t>(qh) * bw);
    std::vector<double> mid2(want_ds ? static_cast<size_t>(qh) * bw : 0);
    for (int y = 0; y < qh; ++y) {
        const double* s = src.data() + static_cast<size_t>(y) * qw;
        kk.fir_valid(s, mid1.data() + static_cast<size_t>(y) * bw, bw, k.taps.data(), n_taps);
        if (want_ds)
            kk.fir_valid(s, mid2.data() + static_cast<size_t>(y) * bw, bw, k.dtaps.data(),
                         n_taps);
    }

    std::vector<double> colbuf1(static_cast<size_t>(qh));
    std::vector<double> colbuf2(want_ds ? static_cast<size_t>(qh) : 0);
    std::vector<double> b(static_cast<size_t>(bh));
    std::vector<double> db(want_ds ? static_cast<size_t>(bh) : 0);
    std::vector<double> tmp(static_cast<size_t>(bh));
    for (int x = 0; x < bw; ++x) {
        for (int y = 0; y < qh; ++y) colbuf1[y] = mid1[static_cast<size_t>(y) * bw + x];
        kk.fir_valid(colbuf1.data(), b.data(), bh, k.taps.data(), n_taps);
        if (want_ds) {
            kk.fir_valid(colbuf1.data(), db.data(), bh, k.dtaps.data(), n_taps);
            for (int y = 0; y < qh; ++y) colbuf2[y] = mid2[static_cast<size_t>(y) * bw + x];
            kk.fir_valid(colbuf2.data(), tmp.data(), bh, k.taps.data(), n_taps);
            for (int y = 0; y < bh; ++y) db[y] += tmp[y];
        }
        for (int y = 0; y < bh; ++y) {
            const size_t idx =
                static_cast<size_t>(box.y0 + y) * img_w + static_cast<size_t>(box.x0 + x);
            const double a_old = alpha.v[idx];
            const double factor = 1.0 - b[y];
            if (want_ds) alpha_ds->v[idx] = alpha_ds->v[idx] * factor - a_old * db[y];
            alpha.v[idx] = a_old * factor;
        }
    }
}

void drop_alpha_product(const DropField& field, const img::GaussianKernel& k,
                        img::Map2D& alpha, img::Map2D* alpha_ds) {
    for (const DropSpec& d : field.drops) {
        accumulate_blurred_occluder(
            alpha, alpha_ds, k, field.height, field.width, d.center_u, d.center_v,
            d.max_radius() + 1.0,
            [&d](int y, int x) { return d.support(y, x); });
    }
}

}  // namespace

DisplacementMap drop_displacement(const DropField& field, int height, int width,
                                  double magnification) {
    check(height > 0 && width > 0, "drop_displacement: non-degenerate extent required");
    DisplacementMap m;
    m.u_off = img::Map2D::create(height, width, 0.0);
    m.v_off = img::Map2D::create(height, width, 0.0);
    m.rho = img::Map2D::create(height, width, 0.0);
    const double s = -(1.0 + magnification);
    for (const DropSpec& d : field.drops) {
        const WindowBox box = occluder_box(d.center_u, d.center_v, d.max_radius() + 1.0,
                                           height, width);
        for (int y = box.y0; y <= box.y1; ++y) {
            for (int x = box.x0; x <= box.x1; ++x) {
                if (d.support(y, x) <= 0.0) continue;
                m.u_off.at(y, x) = s * (x - d.center_u);
                m.v_off.at(y, x) = s * (y - d.center_v);
                m.rho.at(y, x) = d.thickness_rho;
            }
        }
    }
    return m;
}

img::Coords displacement_coords(const DisplacementMap& disp) {
    const int h = disp.u_off.height, w = disp.u_off.width;
    img::Coords c = img::Coords::identity(h, w);
    for (size_t i = 0; i < c.size(); ++i) {
        c.u[i] += disp.rho.v[i] * disp.u_off.v[i];
        c.v[i] += disp.rho.v[i] * disp.v_off.v[i];
    }
    return c;
}

OcclusionRender render_raindrops(const img::Image& scene, const DropField& field,
                                 const PhysicalParams& params, const OcclusionConfig& cfg,
                                 RenderTangent* tangent) {
    check(params.kind == OcclusionKind::drop || params.kind == OcclusionKind::refract,
          "render_raindrops: params.kind must be drop");
    params.validate(cfg.sigma_max);
    check(scene.height == field.height && scene.width == field.width,
          "render_raindrops: scene/field extent mismatch");

    const DisplacementMap disp =
        drop_displacement(field, field.height, field.width, cfg.magnification);
    const img::Coords coords = displacement_coords(disp);
    const img::Image displaced = img::bilinear_sample(scene, coords);

    OcclusionRender out;
    out.occ = img::gaussian_psf_blur(displaced, params.sigma, cfg.sigma_max);
    out.alpha = img::Map2D::create(field.height, field.width, 1.0);

    const img::GaussianKernel k = img::GaussianKernel::make(params.sigma, cfg.sigma_max);
    if (tangent) {
        tangent->occ_dsigma = img::gaussian_psf_blur_dsigma(displaced, params.sigma, cfg.sigma_max);
        tangent->alpha_dsigma = img::Map2D::create(field.height, field.width, 0.0);
        drop_alpha_product(field, k, out.alpha, &tangent->alpha_dsigma);
    } else {
        drop_alpha_product(field, k, out.alpha, nullptr);
    }
    return out;
}

OcclusionRender render_dirt(const img::Image& scene, const DropField& field,
                            const PhysicalParams& params, const OcclusionConfig& cfg,
                            RenderTangent* tangent) {
    check(params.kind == OcclusionKind::dirt, "render_dirt: params.kind must be dirt");
    params.validate(cfg.sigma_max);
    check(scene.height == field.height && scene.width == field.width,
          "render_dirt: scene/field extent mismatch");

    // Flat per-blob colors derived from the field seed; later blobs win.
    img::Image painted = img::Image::create(field.height, field.width, scene.channels, 0.0);
    for (size_t i = 0; i < field.drops.size(); ++i) {
        const DropSpec& d = field.drops[i];
        Rng crng(derive_seed(field.seed, 0x6b5C0105 + i));
        double color[3];
        for (int c = 0; c < 3; ++c) color[c] = crng.uniform(cfg.color_lo[c], cfg.color_hi[c]);
        const WindowBox box = occluder_box(d.center_u, d.center_v, d.max_radius() + 1.0,
                                           field.height, field.width);
        for (int y = box.y0; y <= box.y1; ++y)
            for (int x = box.x0; x <= box.x1; ++x) {
                if (d.support(y, x) <= 0.0) continue;
                for (int c = 0; c < painted.channels; ++c)
                    painted.at(c, y, x) = color[painted.channels == 1 ? 0 : c];
            }
    }

    OcclusionRender out;
    out.occ = img::gaussian_psf_blur(painted, params.sigma, cfg.sigma_max);
    out.alpha = img::Map2D::create(field.height, field.width, 1.0);
    const img::GaussianKernel k = img::GaussianKernel::make(params.sigma, cfg.sigma_max);
    if (tangent) {
        tangent->occ_dsigma = img::gaussian_psf_blur_dsigma(painted, params.sigma, cfg.sigma_max);
        tangent->alpha_dsigma = img::Map2D::create(field.height, field.width, 0.0);
        drop_alpha_product(field, k, out.alpha, &tangent->alpha_dsigma);
    } else {
        drop_alpha_product(field, k, out.alpha, nullptr);
    }
    return out;
}

OcclusionRender render_overlay(const img::Image& scene, const img::Image& overlay,
                               const img::Map2D& overlay_alpha, int du, int dv) {
    check(overlay.height == scene.height && overlay.width == scene.width &&
              overlay.channels == scene.channels,
          "render_overlay: overlay extent mismatch");
    check(overlay_alpha.height == scene.height && overlay_alpha.width == scene.width,
          "render_overlay: overlay alpha extent mismatch");
    check(std::abs(du) <= scene.width && std::abs(dv) <= scene.height,
          "render_overlay: translation outside +/- extent");

    OcclusionRender out;
    out.occ = img::Image::create(scene.height, scene.width, scene.channels, 0.0);
    out.alpha = img::Map2D::create(scene.height, scene.width, 1.0);
    for (int y = 0; y < scene.height; ++y) {
        const int sy = y - dv;
        if (sy < 0 || sy >= scene.height) continue;
        for (int x = 0; x < scene.width; ++x) {
            const int sx = x - du;
            if (sx < 0 || sx >= scene.width) continue;
            out.alpha.at(y, x) = overlay_alpha.at(sy, sx);
            for (int c = 0; c < scene.channels; ++c)
                out.occ.at(c, y, x) = overlay.at(c, sy, sx);
        }
    }
    return out;
}

OcclusionRender render_gaussian_ablation(const img::Image& scene, const DropField& field,
                                         const OcclusionConfig& cfg) {
    check(scene.height == field.height && scene.width == field.width,
          "render_gaussian_ablation: scene/field extent mismatch");
    OcclusionRender out;
    out.occ = img::Image::create(field.height, field.width, scene.channels, 1.0);  // white
    out.alpha = img::Map2D::create(field.height, field.width, 1.0);
    // Opacities multiply as transparencies: alpha = prod(1 - op_d). Gaussian
    // tails are truncated at 4 std.
    for (const DropSpec& d : field.drops) {
        const double s = std::max(1e-6, cfg.gauss_width * d.radius);
        const double reach = 4.0 * s;
        const WindowBox box =
            occluder_box(d.center_u, d.center_v, reach, field.height, field.width);
        for (int y = box.y0; y <= box.y1; ++y)
            for (int x = box.x0; x <= box.x1; ++x) {
                const double du = x - d.center_u;
                const double dv = y - d.center_v;
                const double r2 = du * du + dv * dv;
                if (r2 > reach * reach) continue;
                const double op = cfg.gauss_peak * std::exp(-0.5 * r2 / (s * s));
                out.alpha.at(y, x) *= (1.0 - op);
            }
    }
    return out;
}

OcclusionRender render_occlusions(const img::Image& scene, const DropField& field,
                                  const PhysicalParams& params, const OcclusionConfig& cfg,
                                  uint64_t seed, RenderTangent* tangent) {
    switch (cfg.kind) {
        case OcclusionKind::drop:
        case OcclusionKind::refract:
            return render_raindrops(scene, field, params, cfg, tangent);
        case OcclusionKind::dirt:
            return render_dirt(scene, field, params, cfg, tangent);
        case OcclusionKind::gaussian:
            return render_gaussian_ablation(scene, field, cfg);
        case OcclusionKind::overlay:
            break;
    }
    check(!cfg.overlay_path.empty() && !cfg.overlay_alpha_path.empty(),
          "render_occlusions: overlay_path/overlay_alpha_path not set");
    const img::Image overlay = img::load_png(cfg.overlay_path);
    const img::Image alpha_img = img::load_png(cfg.overlay_alpha_path);
    check(alpha_img.channels == 1, "render_occlusions: overlay alpha must be grayscale");
    img::Map2D ov_alpha = img::Map2D::create(alpha_img.height, alpha_img.width);
    ov_alpha.v = alpha_img.data;
    Rng rng(derive_seed(seed, 0x0e1a11));
    const int du = rng.uniform_int(-scene.width / 4, scene.width / 4);
    const int dv = rng.uniform_int(-scene.height / 4, scene.height / 4);
    return render_overlay(scene, overlay, ov_alpha, du, dv);
}

img::Image composite(const img::Image& scene, const OcclusionRender& render) {
    check(render.occ.same_extent(scene), "composite: occ extent mismatch");
    check(render.alpha.height == scene.height && render.alpha.width == scene.width,
          "composite: alpha extent mismatch");
    img::Image out = scene;
    kern::active().composite(render.alpha.v.data(), scene.data.data(), render.occ.data.data(),
                             out.data.data(), scene.channels,
                             static_cast<int>(scene.plane()));
    return out;
}

img::Image composite_dsigma(const img::Image& scene, const OcclusionRender& render,
                            const RenderTangent& tangent) {
    img::Image out = img::Image::create(scene.height, scene.width, scene.channels, 0.0);
    const size_t hw = scene.plane();
    for (int c = 0; c < scene.channels; ++c) {
        const double* s = scene.plane_ptr(c);
        const double* o = render.occ.plane_ptr(c);
        const double* dociter = tangent.occ_dsigma.plane_ptr(c);
        double* dst = out.plane_ptr(c);
        for (size_t i = 0; i < hw; ++i) {
            dst[i] = tangent.alpha_dsigma.v[i] * (s[i] - o[i]) +
                     (1.0 - render.alpha.v[i]) * dociter[i];
        }
    }
    return out;
}

img::Image composite_raindrops_scene_vjp(const img::Image& scene, const img::Coords& coords,
                                         const img::Map2D& alpha, double sigma,
                                         double sigma_max, const img::Image& g_yd) {
    check(g_yd.same_extent(scene), "scene_vjp: gradient extent mismatch");
    // Direct path: alpha * g.
    img::Image grad = img::Image::create(scene.height, scene.width, scene.channels, 0.0);
    const size_t hw = scene.plane();
    img::Image g_occ = g_yd;
    for (int c = 0; c < scene.channels; ++c) {
        const double* g = g_yd.plane_ptr(c);
        double* gs = grad.plane_ptr(c);
        double* go = g_occ.plane_ptr(c);
        for (size_t i = 0; i < hw; ++i) {
            gs[i] = alpha.v[i] * g[i];
            go[i] = (1.0 - alpha.v[i]) * g[i];
        }
    }
    // Occluder path: through the blur, then the bilinear gather.
    const img::Image g_displaced = img::gaussian_psf_blur_adjoint(g_occ, sigma, sigma_max);
    img::bilinear_sample_vjp(scene, coords, g_displaced, &grad, nullptr);
    return grad;
}

}  // namespace veil::occ
