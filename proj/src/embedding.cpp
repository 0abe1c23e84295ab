#include "schemamatch/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "http.hpp"
#include "schemamatch/errors.hpp"
#include "schemamatch/text.hpp"

namespace schemamatch {

EmbeddingVector::EmbeddingVector(std::vector<double> raw) : values_(std::move(raw)) {
    double norm2 = 0.0;
    for (double v : values_) {
        if (!std::isfinite(v)) throw ProviderError("embedding has a non-finite entry");
        norm2 += v * v;
    }
    zero_ = norm2 == 0.0;
    if (!zero_) {
        const double norm = std::sqrt(norm2);
        for (double& v : values_) v /= norm;
    }
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim())
        throw DimMismatch("cosine of vectors with dims " + std::to_string(u.dim()) + " and " + std::to_string(v.dim()));
    if (u.is_zero() || v.is_zero()) return 0.0;
    const auto a = u.values();
    const auto b = v.values();
    const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    return std::clamp(dot, -1.0, 1.0);
}

LocalEmbedder::LocalEmbedder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw ConfigError("embed.dim must be >= 1");
}

EmbeddingVector LocalEmbedder::embed(std::string_view text) {
    std::vector<double> tf(dim_, 0.0);
    const std::string normalized = normalize_name(text);
    if (!normalized.empty())
        for (const auto& g : char_trigrams(normalized)) tf[fnv1a64(g) % dim_] += 1.0;
    return EmbeddingVector(std::move(tf));
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderOptions options)
    : options_(std::move(options)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options_.max_concurrency, 1, 64))) {
    if (options_.endpoint.empty()) throw ConfigError("remote embedder needs EMBED_ENDPOINT");
    if (options_.dim == 0) throw ConfigError("embed.dim must be >= 1");
}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) {
    slots_.acquire();
    struct Release {
        std::counting_semaphore<64>& s;
        ~Release() { s.release(); }
    } release{slots_};

    detail::Headers headers;
    if (!options_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + options_.api_key);
    const std::string body = Json{{"input", std::string(text)}}.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
        try {
            const Json reply = Json::parse(detail::http_post_json(options_.endpoint, body, headers, 30));
            auto values = reply.at("embedding").get<std::vector<double>>();
            if (values.size() != options_.dim)
                throw DimMismatch("remote embedding has dim " + std::to_string(values.size()) + ", expected " +
                                  std::to_string(options_.dim));
            return EmbeddingVector(std::move(values));
        } catch (const DimMismatch&) {
            throw;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    throw ProviderError("embedding request failed after " + std::to_string(options_.retries + 1) +
                        " attempts: " + last_error);
}

std::string text_hash(std::string_view text) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

CachedEmbedder::CachedEmbedder(std::shared_ptr<EmbeddingProvider> primary, std::shared_ptr<EmbeddingProvider> fallback)
    : primary_(std::move(primary)), fallback_(std::move(fallback)) {
    if (!primary_) throw ConfigError("cached embedder needs a provider");
    if (fallback_ && fallback_->dim() != primary_->dim())
        throw ConfigError("fallback embedder dim differs from the primary provider");
}

EmbeddingVector CachedEmbedder::embed(std::string_view text) {
    const std::string key = text_hash(text);
    {
        std::lock_guard lock(mu_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    EmbeddingVector v;
    try {
        v = primary_->embed(text);
    } catch (const ProviderError&) {
        if (!fallback_) throw;
        v = fallback_->embed(text);
        std::lock_guard lock(mu_);
        ++fallback_uses_;
    }
    std::lock_guard lock(mu_);
    // A concurrent insert of the same key wins; both values are identical.
    return cache_.emplace(key, std::move(v)).first->second;
}

std::size_t CachedEmbedder::size() const {
    std::lock_guard lock(mu_);
    return cache_.size();
}

std::size_t CachedEmbedder::fallback_uses() const {
    std::lock_guard lock(mu_);
    return fallback_uses_;
}

void CachedEmbedder::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return;
    const Json doc = read_json_file(path);
    if (doc.value("dim", std::size_t{0}) != dim()) return;
    std::lock_guard lock(mu_);
    for (auto it = doc.at("vectors").begin(); it != doc.at("vectors").end(); ++it)
        cache_.emplace(it.key(), EmbeddingVector(it->get<std::vector<double>>()));
}

void CachedEmbedder::save(const std::filesystem::path& path) const {
    Json vectors = Json::object();
    {
        std::lock_guard lock(mu_);
        for (const auto& [k, v] : cache_) vectors[k] = std::vector<double>(v.values().begin(), v.values().end());
    }
    write_text_file(path, Json{{"dim", dim()}, {"vectors", std::move(vectors)}}.dump() + "\n");
}

EmbeddingVector embed_text(EmbeddingProvider& provider, std::string_view text) { return provider.embed(text); }

std::vector<std::string> rank_tables_topk(const Table& source, std::span<const Table> targets, std::size_t k,
                                          const ElementConfig& cfg, EmbeddingProvider& provider) {
    if (k == 0) throw ConfigError("top-k retrieval needs k >= 1");
    if (targets.empty()) throw ConfigError("top-k retrieval needs at least one target table");
    const EmbeddingVector query = provider.embed(serialize_table(source, cfg));

    struct Scored {
        double score;
        std::string key;
        std::string name;
    };
    std::vector<Scored> scored;
    scored.reserve(targets.size());
    for (const auto& t : targets)
        scored.push_back({cosine(query, provider.embed(serialize_table(t, cfg))), ident_key(t.name), t.name});
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.key < b.key;
    });
    const std::size_t n = std::min(k, scored.size());
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(scored[i].name);
    return out;
}

}  // namespace schemamatch
