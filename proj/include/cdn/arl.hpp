#pragma once

#include <string>

#include "cdn/errors.hpp"

namespace cdn::arl {

// Parsed fields of an Akamai Resource Locator:
//   http://a{serial}.{domain}/{type}/{serial}/{provider}/{object_data}/{absolute_url}
struct Arl {
    std::string serial;         // digit string, hostname and path copies must match
    std::string akamai_domain;  // e.g. g.akamaitech.net
    std::string type_field;     // opaque token
    std::string provider_code;  // opaque token
    std::string object_data;    // opaque: expiration time or content version tag
    std::string absolute_url;   // origin host + path, kept verbatim

    bool operator==(const Arl&) const = default;
};

// `lenient_serial` skips the hostname/path serial equality check and keeps
// the hostname serial.
Arl parse_arl(const std::string& text, bool lenient_serial = false);

std::string serialize_arl(const Arl& arl);

// Rewrite an origin URL ("http://host/path" or "host/path") into an ARL; the
// origin's scheme is stripped into absolute_url.
std::string akamaize(const std::string& origin_url, const std::string& serial,
                     const std::string& akamai_domain, const std::string& type_field,
                     const std::string& provider_code, const std::string& object_data);

}  // namespace cdn::arl
