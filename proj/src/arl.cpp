#include "cdn/arl.hpp"

#include <algorithm>
#include <cctype>

namespace cdn::arl {

namespace {

constexpr const char* kScheme = "http://";

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c) != 0;
    });
}

void require_token(const std::string& value, const char* field) {
    if (value.empty())
        throw Error(Errc::empty_field, std::string(field) + " must not be empty");
    if (value.find('/') != std::string::npos)
        throw Error(Errc::empty_field, std::string(field) + " must not contain '/'");
}

}  // namespace

Arl parse_arl(const std::string& text, bool lenient_serial) {
    if (text.rfind(kScheme, 0) != 0)
        throw Error(Errc::scheme_mismatch, "ARL must start with http://");
    const std::string rest = text.substr(std::string(kScheme).size());

    std::size_t slash = rest.find('/');
    if (slash == std::string::npos)
        throw Error(Errc::missing_segment, "ARL has no path");
    const std::string host = rest.substr(0, slash);
    if (host.size() < 2 || host[0] != 'a')
        throw Error(Errc::malformed_host, "hostname must be a<serial>.<domain>");
    std::size_t dot = host.find('.');
    if (dot == std::string::npos || dot + 1 >= host.size())
        throw Error(Errc::malformed_host, "hostname has no Akamai domain");

    Arl arl;
    arl.serial = host.substr(1, dot - 1);
    arl.akamai_domain = host.substr(dot + 1);
    if (!all_digits(arl.serial))
        throw Error(Errc::malformed_host, "hostname serial must be digits");

    // path: type / serial / provider / object_data / absolute_url(verbatim)
    std::string path = rest.substr(slash + 1);
    std::string segments[4];
    for (auto& segment : segments) {
        std::size_t next = path.find('/');
        if (next == std::string::npos)
            throw Error(Errc::missing_segment, "ARL path is missing segments");
        segment = path.substr(0, next);
        if (segment.empty())
            throw Error(Errc::missing_segment, "empty ARL path segment");
        path = path.substr(next + 1);
    }
    arl.type_field = segments[0];
    arl.provider_code = segments[2];
    arl.object_data = segments[3];
    arl.absolute_url = path;
    if (arl.absolute_url.empty())
        throw Error(Errc::missing_segment, "empty absolute URL");
    if (arl.absolute_url.find('/') == std::string::npos)
        throw Error(Errc::missing_segment, "absolute URL must contain host and path");

    const std::string& path_serial = segments[1];
    if (!lenient_serial && path_serial != arl.serial)
        throw Error(Errc::serial_mismatch,
                    "serial mismatch: " + arl.serial + " != " + path_serial);
    return arl;
}

std::string serialize_arl(const Arl& arl) {
    return std::string(kScheme) + "a" + arl.serial + "." + arl.akamai_domain + "/" +
           arl.type_field + "/" + arl.serial + "/" + arl.provider_code + "/" +
           arl.object_data + "/" + arl.absolute_url;
}

std::string akamaize(const std::string& origin_url, const std::string& serial,
                     const std::string& akamai_domain, const std::string& type_field,
                     const std::string& provider_code, const std::string& object_data) {
    Arl arl;
    arl.serial = serial;
    arl.akamai_domain = akamai_domain;
    arl.type_field = type_field;
    arl.provider_code = provider_code;
    arl.object_data = object_data;

    if (!all_digits(serial))
        throw Error(Errc::empty_field, "serial must be a digit string");
    if (akamai_domain.empty() || akamai_domain.find('/') != std::string::npos)
        throw Error(Errc::empty_field, "bad Akamai domain");
    require_token(type_field, "type");
    require_token(provider_code, "provider code");
    require_token(object_data, "object data");

    // strip the scheme; whatever remains must carry host and path
    std::string stripped = origin_url;
    std::size_t scheme = stripped.find("://");
    if (scheme != std::string::npos) stripped = stripped.substr(scheme + 3);
    std::size_t slash = stripped.find('/');
    if (stripped.empty() || slash == std::string::npos || slash == 0 ||
        slash + 1 >= stripped.size())
        throw Error(Errc::missing_segment, "origin URL needs a host and a path");
    arl.absolute_url = stripped;
    return serialize_arl(arl);
}

}  // namespace cdn::arl
