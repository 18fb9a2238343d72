"""Canonical English namespace names, used to split prefixed titles."""

NAMESPACES = {
    "Media": -2,
    "Special": -1,
    "Talk": 1,
    "User": 2,
    "User_talk": 3,
    "Wikipedia": 4,
    "Wikipedia_talk": 5,
    "File": 6,
    "File_talk": 7,
    "MediaWiki": 8,
    "MediaWiki_talk": 9,
    "Template": 10,
    "Template_talk": 11,
    "Help": 12,
    "Help_talk": 13,
    "Category": 14,
    "Category_talk": 15,
    "Portal": 100,
    "Portal_talk": 101,
    "Draft": 118,
    "Draft_talk": 119,
    "TimedText": 710,
    "TimedText_talk": 711,
    "Module": 828,
    "Module_talk": 829,
}


def split_namespace(title: str, names: dict = NAMESPACES) -> tuple[int, str]:
    """``"Talk:Foo bar"`` -> ``(1, "Foo_bar")``; unprefixed titles are ns 0."""
    title = title.replace(" ", "_")
    if ":" in title:
        prefix, rest = title.split(":", 1)
        prefix = prefix[:1].upper() + prefix[1:]
        ns = names.get(prefix)
        if ns is not None and rest:
            return ns, rest
    return 0, title
