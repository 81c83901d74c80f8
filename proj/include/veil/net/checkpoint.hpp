#pragma once

#include <map>
#include <string>
#include <vector>

#include "veil/net/adam.hpp"
#include "veil/net/discriminator.hpp"
#include "veil/net/generator.hpp"

namespace veil::net {

// Versioned container of named double blobs: network parameters, optimizer
// moments and scalar metadata. Writes are atomic (temp file then rename) and
// byte-deterministic for identical contents.
struct Checkpoint {
    static constexpr uint32_t kVersion = 1;

    std::string stage;
    std::string config_hash;
    std::map<std::string, std::vector<double>> blobs;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    void put_scalar(const std::string& name, double v) { blobs[name] = {v}; }
    double scalar(const std::string& name) const;
    bool has(const std::string& name) const { return blobs.count(name) != 0; }
};

// Parameter <-> blob shuttling. Load throws on any missing or mis-sized blob.
void store_params(Checkpoint& ck, std::vector<ParamBlob> params);
void load_params(const Checkpoint& ck, std::vector<ParamBlob> params);

void store_adam(Checkpoint& ck, const std::string& prefix, Adam& opt);
void load_adam(const Checkpoint& ck, const std::string& prefix, Adam& opt);

// Architecture hyperparameters travel with the checkpoint so loads can
// reconstruct identically shaped networks.
void store_generator(Checkpoint& ck, Generator& g);
Generator load_generator(const Checkpoint& ck);
void store_discriminator(Checkpoint& ck, Discriminator& d);
Discriminator load_discriminator(const Checkpoint& ck);

}  // namespace veil::net
