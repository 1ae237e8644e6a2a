#include "httplib.h"
#include "sinogate/llmclient.hpp"

namespace sinogate {

namespace {

class HttplibPoster final : public HttpPoster {
public:
    HttplibPoster(const std::string& base_url, std::chrono::seconds timeout) : timeout_(timeout)
    {
        // Split "scheme://host[:port]/prefix" into the client origin and the path prefix.
        const auto scheme_end = base_url.find("://");
        const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        const auto path_start = base_url.find('/', host_start);
        origin_ = base_url.substr(0, path_start);
        std::string prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
        path_ = prefix + "/chat/completions";
    }

    HttpResult post(const std::string& body, const HttpHeaders& headers) override
    {
        // httplib::Client is not thread-safe; one per call keeps the poster shareable.
        httplib::Client client(origin_);
        client.set_connection_timeout(timeout_);
        client.set_read_timeout(timeout_);
        client.set_write_timeout(timeout_);
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        auto res = client.Post(path_, h, body, "application/json");
        HttpResult out;
        if (!res) {
            out.transport_error = httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        out.body = std::move(res->body);
        return out;
    }

private:
    std::string origin_;
    std::string path_;
    std::chrono::seconds timeout_;
};

} // namespace

std::unique_ptr<HttpPoster> make_http_poster(const std::string& base_url, std::chrono::seconds timeout)
{
    return std::make_unique<HttplibPoster>(base_url, timeout);
}

} // namespace sinogate
