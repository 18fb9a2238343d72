"""File names and column layout of the nine knowledge-graph tables."""

from wikikg.normalize.identifiers import DEFAULT_SCHEMES

PAGE_COLUMNS = (
    "page_id", "namespace", "title", "is_redirect", "is_new", "restrictions",
    "touched", "length", "created", "edits", "editors", "views", "references",
)
CATEGORY_COLUMNS = ("category_id", "title", "pages", "subcats", "files", "hidden")
PAGE_PROPERTY_COLUMNS = ("page_id", "prop_name", "prop_value")
URL_COLUMNS = ("url_id", "url", "domain")
PAGE_CATEGORY_COLUMNS = ("page_id", "category_id", "link_type")
PAGE_LINK_COLUMNS = ("from_page_id", "to_page_id")
PAGE_PUB_COLUMNS = ("page_id", "pub_id")
PAGE_URL_COLUMNS = ("page_id", "url_id", "in_reference")

LINK_TYPES = ("page", "subcat", "file")


def pub_columns(schemes=DEFAULT_SCHEMES) -> tuple:
    return ("pub_id", "key") + tuple(schemes)


TABLE_FILES = {
    "page": "page.tsv",
    "category": "category.tsv",
    "page_property": "page_property.tsv",
    "pub": "pub.tsv",
    "url": "url.tsv",
    "page_category": "page_category.tsv",
    "page_link": "page_link.tsv",
    "page_pub": "page_pub.tsv",
    "page_url": "page_url.tsv",
}

REPORT_FILE = "run_report.txt"
REJECTED_URLS_FILE = "rejected_urls.tsv"
REJECTED_URL_COLUMNS = ("source", "page_id", "raw_url", "reason")
