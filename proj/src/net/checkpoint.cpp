#include "veil/net/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>

namespace veil::net {

namespace {

constexpr char kMagic[8] = {'V', 'E', 'I', 'L', 'C', 'K', 'P', '1'};

void write_u32(std::FILE* f, uint32_t v) { std::fwrite(&v, sizeof(v), 1, f); }
void write_u64(std::FILE* f, uint64_t v) { std::fwrite(&v, sizeof(v), 1, f); }

void write_string(std::FILE* f, const std::string& s) {
    write_u32(f, static_cast<uint32_t>(s.size()));
    std::fwrite(s.data(), 1, s.size(), f);
}

uint32_t read_u32(std::FILE* f, const std::string& path) {
    uint32_t v = 0;
    if (std::fread(&v, sizeof(v), 1, f) != 1) throw IoError("truncated checkpoint: " + path);
    return v;
}

uint64_t read_u64(std::FILE* f, const std::string& path) {
    uint64_t v = 0;
    if (std::fread(&v, sizeof(v), 1, f) != 1) throw IoError("truncated checkpoint: " + path);
    return v;
}

std::string read_string(std::FILE* f, const std::string& path) {
    const uint32_t n = read_u32(f, path);
    std::string s(n, '\0');
    if (n && std::fread(s.data(), 1, n, f) != n) throw IoError("truncated checkpoint: " + path);
    return s;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw IoError("cannot open checkpoint for writing: " + tmp);
    std::fwrite(kMagic, 1, sizeof(kMagic), f);
    write_u32(f, kVersion);
    write_string(f, stage);
    write_string(f, config_hash);
    write_u32(f, static_cast<uint32_t>(blobs.size()));
    for (const auto& [name, data] : blobs) {
        write_string(f, name);
        write_u64(f, data.size());
        std::fwrite(data.data(), sizeof(double), data.size(), f);
    }
    if (std::fclose(f) != 0) throw IoError("checkpoint write failed: " + tmp);
    std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open checkpoint: " + path);
    Checkpoint ck;
    char magic[8];
    if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kMagic, 8) != 0) {
        std::fclose(f);
        throw IoError("not a veil checkpoint: " + path);
    }
    const uint32_t version = read_u32(f, path);
    if (version != kVersion) {
        std::fclose(f);
        throw IoError("unsupported checkpoint version: " + path);
    }
    ck.stage = read_string(f, path);
    ck.config_hash = read_string(f, path);
    const uint32_t n = read_u32(f, path);
    for (uint32_t i = 0; i < n; ++i) {
        const std::string name = read_string(f, path);
        const uint64_t len = read_u64(f, path);
        std::vector<double> data(len);
        if (len && std::fread(data.data(), sizeof(double), len, f) != len) {
            std::fclose(f);
            throw IoError("truncated checkpoint: " + path);
        }
        ck.blobs.emplace(name, std::move(data));
    }
    std::fclose(f);
    return ck;
}

double Checkpoint::scalar(const std::string& name) const {
    auto it = blobs.find(name);
    check(it != blobs.end() && it->second.size() == 1,
          "checkpoint: missing scalar " + name);
    return it->second[0];
}

void store_params(Checkpoint& ck, std::vector<ParamBlob> params) {
    for (auto& p : params) ck.blobs[p.name] = *p.value;
}

void load_params(const Checkpoint& ck, std::vector<ParamBlob> params) {
    for (auto& p : params) {
        auto it = ck.blobs.find(p.name);
        check(it != ck.blobs.end(), "checkpoint: missing blob " + p.name);
        check(it->second.size() == p.value->size(),
              "checkpoint: size mismatch for blob " + p.name);
        *p.value = it->second;
    }
}

void store_adam(Checkpoint& ck, const std::string& prefix, Adam& opt) {
    ck.put_scalar(prefix + ".t", static_cast<double>(opt.t()));
    for (const auto& [name, m] : opt.moments1()) ck.blobs[prefix + ".m." + name] = m;
    for (const auto& [name, v] : opt.moments2()) ck.blobs[prefix + ".v." + name] = v;
}

void load_adam(const Checkpoint& ck, const std::string& prefix, Adam& opt) {
    if (!ck.has(prefix + ".t")) return;  // fresh optimizer
    opt.set_t(static_cast<int64_t>(ck.scalar(prefix + ".t")));
    const std::string mp = prefix + ".m.", vp = prefix + ".v.";
    for (const auto& [name, data] : ck.blobs) {
        if (name.rfind(mp, 0) == 0) opt.moments1()[name.substr(mp.size())] = data;
        else if (name.rfind(vp, 0) == 0) opt.moments2()[name.substr(vp.size())] = data;
    }
}

void store_generator(Checkpoint& ck, Generator& g) {
    ck.put_scalar("g.arch.base", g.config().base_channels);
    ck.put_scalar("g.arch.res_blocks", g.config().res_blocks);
    store_params(ck, g.params());
}

Generator load_generator(const Checkpoint& ck) {
    Generator::Config cfg;
    cfg.base_channels = static_cast<int>(ck.scalar("g.arch.base"));
    cfg.res_blocks = static_cast<int>(ck.scalar("g.arch.res_blocks"));
    Generator g(cfg, 0);
    load_params(ck, g.params());
    return g;
}

void store_discriminator(Checkpoint& ck, Discriminator& d) {
    ck.put_scalar("d.arch.base", d.config().base_channels);
    ck.put_scalar("d.arch.scales", d.config().scales);
    store_params(ck, d.params());
}

Discriminator load_discriminator(const Checkpoint& ck) {
    Discriminator::Config cfg;
    cfg.base_channels = static_cast<int>(ck.scalar("d.arch.base"));
    cfg.scales = static_cast<int>(ck.scalar("d.arch.scales"));
    Discriminator d(cfg, 0);
    load_params(ck, d.params());
    return d;
}

}  // namespace veil::net
