#include "veil/pipe/config.hpp"

#include <fstream>
#include <sstream>

namespace veil::pipe {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Parser {
    std::map<std::string, std::map<std::string, std::string>> sections;

    void parse(const std::string& text) {
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                check(line.back() == ']', "config: malformed section at line " +
                                              std::to_string(lineno));
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            check(eq != std::string::npos,
                  "config: expected key = value at line " + std::to_string(lineno));
            check(!section.empty(),
                  "config: key outside any section at line " + std::to_string(lineno));
            sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
    }

    // typed getters; consume keys so leftovers can be reported
    std::map<std::string, std::string>* sec(const std::string& name) {
        auto it = sections.find(name);
        return it == sections.end() ? nullptr : &it->second;
    }

    template <class F>
    static void take(std::map<std::string, std::string>* s, const std::string& key, F&& apply) {
        if (!s) return;
        auto it = s->find(key);
        if (it == s->end()) return;
        apply(it->second);
        s->erase(it);
    }

    static double to_real(const std::string& v) { return std::stod(v); }
    static int to_int(const std::string& v) { return std::stoi(v); }
    static uint64_t to_u64(const std::string& v) { return std::stoull(v); }

    static std::array<double, 3> to_rgb(const std::string& v) {
        std::array<double, 3> out{};
        std::istringstream in(v);
        std::string tok;
        for (int i = 0; i < 3; ++i) {
            check(static_cast<bool>(std::getline(in, tok, ',')),
                  "config: expected three comma-separated values: " + v);
            out[i] = std::stod(tok);
        }
        return out;
    }

    void finish(const std::string& context) {
        for (const auto& [name, kv] : sections)
            for (const auto& [key, value] : kv)
                throw ContractError("config: unknown key [" + name + "] " + key + " = " +
                                    value + " (" + context + ")");
    }
};

void load_stage(Parser& p, const std::string& name, Config::Stage& st) {
    auto* s = p.sec(name);
    Parser::take(s, "iterations", [&](const std::string& v) { st.iterations = Parser::to_int(v); });
    Parser::take(s, "batch", [&](const std::string& v) { st.batch = Parser::to_int(v); });
    Parser::take(s, "lr_g", [&](const std::string& v) { st.lr_g = Parser::to_real(v); });
    Parser::take(s, "lr_d", [&](const std::string& v) { st.lr_d = Parser::to_real(v); });
    Parser::take(s, "g_base", [&](const std::string& v) { st.g_base = Parser::to_int(v); });
    Parser::take(s, "g_res_blocks",
                 [&](const std::string& v) { st.g_res_blocks = Parser::to_int(v); });
    Parser::take(s, "d_base", [&](const std::string& v) { st.d_base = Parser::to_int(v); });
    Parser::take(s, "seed", [&](const std::string& v) { st.seed = Parser::to_u64(v); });
    Parser::take(s, "beta", [&](const std::string& v) { st.beta = Parser::to_real(v); });
    Parser::take(s, "p_r", [&](const std::string& v) { st.p_r = Parser::to_real(v); });
    Parser::take(s, "kind", [&](const std::string& v) { st.kind = v; });
    if (s && !s->empty()) {
        for (const auto& [key, value] : *s)
            throw ContractError("config: unknown key [" + name + "] " + key + " = " + value);
        // unreachable
    }
    if (s) p.sections.erase(name);
}

}  // namespace

Config Config::from_string(const std::string& text) {
    Parser p;
    p.parse(text);

    Config cfg;
    cfg.hash = to_hex(fnv1a(text.data(), text.size()));

    auto* d = p.sec("data");
    Parser::take(d, "root", [&](const std::string& v) { cfg.data.root = v; });
    Parser::take(d, "train_source", [&](const std::string& v) { cfg.data.train_source = v; });
    Parser::take(d, "train_target", [&](const std::string& v) { cfg.data.train_target = v; });
    Parser::take(d, "eval_source", [&](const std::string& v) { cfg.data.eval_source = v; });
    Parser::take(d, "eval_gt_style", [&](const std::string& v) { cfg.data.eval_gt_style = v; });
    Parser::take(d, "eval_gt_mask", [&](const std::string& v) { cfg.data.eval_gt_mask = v; });
    Parser::take(d, "eval_target", [&](const std::string& v) { cfg.data.eval_target = v; });
    if (d && d->empty()) p.sections.erase("data");

    auto* sy = p.sec("synthetic");
    Parser::take(sy, "n_train_source",
                 [&](const std::string& v) { cfg.synthetic.n_train_source = Parser::to_int(v); });
    Parser::take(sy, "n_train_target",
                 [&](const std::string& v) { cfg.synthetic.n_train_target = Parser::to_int(v); });
    Parser::take(sy, "n_eval", [&](const std::string& v) { cfg.synthetic.n_eval = Parser::to_int(v); });
    Parser::take(sy, "height", [&](const std::string& v) { cfg.synthetic.height = Parser::to_int(v); });
    Parser::take(sy, "width", [&](const std::string& v) { cfg.synthetic.width = Parser::to_int(v); });
    Parser::take(sy, "style", [&](const std::string& v) { cfg.synthetic.style = v; });
    Parser::take(sy, "style_strength",
                 [&](const std::string& v) { cfg.synthetic.style_strength = Parser::to_real(v); });
    Parser::take(sy, "sigma_star",
                 [&](const std::string& v) { cfg.synthetic.sigma_star = Parser::to_real(v); });
    Parser::take(sy, "seed", [&](const std::string& v) { cfg.synthetic.seed = Parser::to_u64(v); });
    if (sy && sy->empty()) p.sections.erase("synthetic");

    auto* oc = p.sec("occlusion");
    occ::OcclusionConfig& o = cfg.occlusion;
    Parser::take(oc, "kind", [&](const std::string& v) { o.kind = occ::kind_from_string(v); });
    Parser::take(oc, "p_r", [&](const std::string& v) { o.p_r = Parser::to_real(v); });
    Parser::take(oc, "r_min", [&](const std::string& v) { o.r_min = Parser::to_real(v); });
    Parser::take(oc, "r_max", [&](const std::string& v) { o.r_max = Parser::to_real(v); });
    Parser::take(oc, "magnification",
                 [&](const std::string& v) { o.magnification = Parser::to_real(v); });
    Parser::take(oc, "rho_min", [&](const std::string& v) { o.rho_min = Parser::to_real(v); });
    Parser::take(oc, "rho_max", [&](const std::string& v) { o.rho_max = Parser::to_real(v); });
    Parser::take(oc, "sigma_max", [&](const std::string& v) { o.sigma_max = Parser::to_real(v); });
    Parser::take(oc, "shape_amp_max",
                 [&](const std::string& v) { o.shape_amp_max = Parser::to_real(v); });
    Parser::take(oc, "shape_noise",
                 [&](const std::string& v) { o.shape_noise = Parser::to_real(v); });
    Parser::take(oc, "color_lo", [&](const std::string& v) { o.color_lo = Parser::to_rgb(v); });
    Parser::take(oc, "color_hi", [&](const std::string& v) { o.color_hi = Parser::to_rgb(v); });
    Parser::take(oc, "overlay_path", [&](const std::string& v) { o.overlay_path = v; });
    Parser::take(oc, "overlay_alpha_path",
                 [&](const std::string& v) { o.overlay_alpha_path = v; });
    Parser::take(oc, "gauss_peak", [&](const std::string& v) { o.gauss_peak = Parser::to_real(v); });
    Parser::take(oc, "gauss_width", [&](const std::string& v) { o.gauss_width = Parser::to_real(v); });
    if (oc && oc->empty()) p.sections.erase("occlusion");

    load_stage(p, "stage1", cfg.stage1);
    load_stage(p, "stage3", cfg.stage3);

    auto* es = p.sec("estimation");
    Parser::take(es, "init_sigma",
                 [&](const std::string& v) { cfg.estimation.init_sigma = Parser::to_real(v); });
    Parser::take(es, "steps", [&](const std::string& v) { cfg.estimation.steps = Parser::to_int(v); });
    Parser::take(es, "step_size",
                 [&](const std::string& v) { cfg.estimation.step_size = Parser::to_real(v); });
    Parser::take(es, "batch", [&](const std::string& v) { cfg.estimation.batch = Parser::to_int(v); });
    Parser::take(es, "seed", [&](const std::string& v) { cfg.estimation.seed = Parser::to_u64(v); });
    Parser::take(es, "adaptive",
                 [&](const std::string& v) { cfg.estimation.adaptive = (v == "true" || v == "1"); });
    Parser::take(es, "max_images",
                 [&](const std::string& v) { cfg.estimation.max_images = Parser::to_int(v); });
    if (es && es->empty()) p.sections.erase("estimation");

    auto* gd = p.sec("guidance");
    Parser::take(gd, "max_images",
                 [&](const std::string& v) { cfg.guidance.max_images = Parser::to_int(v); });
    if (gd && gd->empty()) p.sections.erase("guidance");

    auto* ev = p.sec("eval");
    Parser::take(ev, "seed", [&](const std::string& v) { cfg.eval.seed = Parser::to_u64(v); });
    Parser::take(ev, "diversity_pairs",
                 [&](const std::string& v) { cfg.eval.diversity_pairs = Parser::to_int(v); });
    if (ev && ev->empty()) p.sections.erase("eval");

    p.finish("see docs/config reference in README");
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return from_string(buf.str());
}

}  // namespace veil::pipe
