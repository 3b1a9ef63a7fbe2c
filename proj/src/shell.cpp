#include "vre/shell.hpp"

#include <random>

#include "vre/crypto.hpp"

namespace vre::api {

namespace {

struct ShellFileSpec {
    const char* path;
    const char* content_type;
    double share;  // of the total shell byte budget
};

// Rough single-page-app proportions: one big vendor bundle, app code,
// styles, markup, an image.
constexpr ShellFileSpec kShellFiles[] = {
    {"/app/index.html", "text/html", 0.01},
    {"/app/styles.css", "text/css", 0.05},
    {"/app/bootstrap.css", "text/css", 0.09},
    {"/app/app.js", "application/javascript", 0.15},
    {"/app/vendor.js", "application/javascript", 0.60},
    {"/app/logo.png", "image/png", 0.10},
};

std::string fixture_bytes(const std::string& seed_text, std::size_t size) {
    static constexpr char kChars[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789 {}();=+-*/.,\n";
    std::seed_seq seq(seed_text.begin(), seed_text.end());
    std::mt19937 rng(seq);
    std::uniform_int_distribution<std::size_t> dist(0, sizeof(kChars) - 2);
    std::string out(size, ' ');
    for (auto& c : out) c = kChars[dist(rng)];
    return out;
}

}  // namespace

std::vector<ShellAsset> make_shell(std::size_t total_bytes) {
    std::vector<ShellAsset> assets;
    assets.reserve(std::size(kShellFiles));
    for (const auto& spec : kShellFiles) {
        ShellAsset asset;
        asset.path = spec.path;
        asset.content_type = spec.content_type;
        asset.bytes = fixture_bytes(spec.path, static_cast<std::size_t>(
                                                   static_cast<double>(total_bytes) * spec.share));
        asset.etag = "\"" + crypto::sha256_hex(asset.bytes).substr(0, 16) + "\"";
        assets.push_back(std::move(asset));
    }
    return assets;
}

std::vector<std::string> shell_manifest() {
    std::vector<std::string> paths;
    for (const auto& spec : kShellFiles) paths.emplace_back(spec.path);
    return paths;
}

}  // namespace vre::api
