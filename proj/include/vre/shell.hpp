#pragma once

#include <string>
#include <vector>

namespace vre::api {

/// One static file of the single-page app shell the service hands to
/// browsers. Content is deterministic fixture bytes; only the byte cost
/// matters to the benchmarks.
struct ShellAsset {
    std::string path;  // request path, e.g. "/app/vendor.js"
    std::string content_type;
    std::string bytes;
    std::string etag;
};

/// The fixed shell file set sized to total_bytes (may be zero). Both the
/// server and the load generator derive the same manifest from this.
std::vector<ShellAsset> make_shell(std::size_t total_bytes);

/// Request paths of the shell files, in page-load order.
std::vector<std::string> shell_manifest();

}  // namespace vre::api
