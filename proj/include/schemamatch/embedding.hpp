#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "schemamatch/schema.hpp"
#include "schemamatch/serializer.hpp"

namespace schemamatch {

// L2-normalized embedding. A zero input stays zero and is flagged.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    // Normalizes `raw`; throws ProviderError on non-finite entries.
    explicit EmbeddingVector(std::vector<double> raw);

    std::size_t dim() const noexcept { return values_.size(); }
    bool is_zero() const noexcept { return zero_; }
    std::span<const double> values() const noexcept { return values_; }

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> values_;
    bool zero_ = true;
};

// Throws DimMismatch on unequal dims; 0 when either side is the zero vector.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual EmbeddingVector embed(std::string_view text) = 0;
    virtual std::size_t dim() const = 0;
};

// Hashed character-trigram term frequencies of normalize_name(text).
class LocalEmbedder final : public EmbeddingProvider {
public:
    explicit LocalEmbedder(std::size_t dim = 256);
    EmbeddingVector embed(std::string_view text) override;
    std::size_t dim() const override { return dim_; }

private:
    std::size_t dim_;
};

struct RemoteEmbedderOptions {
    std::string endpoint;  // http(s)://host[:port]/path
    std::size_t dim = 256;
    int retries = 2;
    std::size_t max_concurrency = 4;
    std::string api_key;
};

// POSTs {"input": text} and expects {"embedding": [numbers]}.
class RemoteEmbedder final : public EmbeddingProvider {
public:
    explicit RemoteEmbedder(RemoteEmbedderOptions options);
    EmbeddingVector embed(std::string_view text) override;
    std::size_t dim() const override { return options_.dim; }

private:
    RemoteEmbedderOptions options_;
    std::counting_semaphore<64> slots_;
};

// Exact-text cache in front of another provider, with an optional local
// fallback used when the primary fails. Safe for concurrent use.
class CachedEmbedder final : public EmbeddingProvider {
public:
    explicit CachedEmbedder(std::shared_ptr<EmbeddingProvider> primary,
                            std::shared_ptr<EmbeddingProvider> fallback = nullptr);

    EmbeddingVector embed(std::string_view text) override;
    std::size_t dim() const override { return primary_->dim(); }

    std::size_t size() const;
    std::size_t fallback_uses() const;

    // Content-addressed cache file: {"dim": n, "vectors": {"<fnv64 hex>": [...]}}.
    void load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

private:
    std::shared_ptr<EmbeddingProvider> primary_;
    std::shared_ptr<EmbeddingProvider> fallback_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, EmbeddingVector> cache_;
    std::size_t fallback_uses_ = 0;
};

std::string text_hash(std::string_view text);

EmbeddingVector embed_text(EmbeddingProvider& provider, std::string_view text);

// Target table names by descending cosine to `source`, ties by ascending
// name key, truncated to min(k, targets.size()).
std::vector<std::string> rank_tables_topk(const Table& source, std::span<const Table> targets, std::size_t k,
                                          const ElementConfig& cfg, EmbeddingProvider& provider);

}  // namespace schemamatch
