"""Script classes: which characters are allowed in tokens and sentences.

A script class names the character repertoire of a target language. Tokens
must consist purely of word characters from their class; whole sentences may
additionally contain whitespace and common punctuation. Control characters
are never allowed anywhere.
"""

import re

# Word characters per script class (letters/digits; hyphen and apostrophe are
# handled separately as intra-word joiners).
_LATIN_WORD = r"0-9A-Za-zÀ-ɏḀ-ỿ"
_KANA = r"぀-ヿㇰ-ㇿｦ-ﾟ"
_CJK = r"々〇一-鿿豈-﫿"

_WORD_PATTERNS = {
    "latin": f"[{_LATIN_WORD}]",
    "ja": f"[{_LATIN_WORD}{_KANA}{_CJK}ー]",
    "zh": f"[{_LATIN_WORD}{_CJK}]",
    "any": r"[^\W_]",  # any unicode letter or digit
}

_ASCII_PUNCT = r" !\"'(),\-.:;?"
_FULLWIDTH_PUNCT = "、。「」！（），：；？・"

_SENTENCE_EXTRAS = {
    "latin": _ASCII_PUNCT,
    "ja": _ASCII_PUNCT + _FULLWIDTH_PUNCT,
    "zh": _ASCII_PUNCT + _FULLWIDTH_PUNCT,
    "any": _ASCII_PUNCT + _FULLWIDTH_PUNCT,
}

SCRIPT_CLASSES = tuple(_WORD_PATTERNS)

# Default script class per language tag; unknown tags fall back to "any".
_LANG_SCRIPTS = {"en": "latin", "ja": "ja", "zh": "zh"}


def script_for_lang(lang: str) -> str:
    return _LANG_SCRIPTS.get(lang.split("-")[0].lower(), "any")


def _compile(pattern: str) -> re.Pattern:
    return re.compile(pattern)


_WORD_CHAR = {name: _compile(pat) for name, pat in _WORD_PATTERNS.items()}
_SENTENCE_OK = {
    name: _compile(f"^(?:{_WORD_PATTERNS[name]}|['\\-]|[{re.escape(_SENTENCE_EXTRAS[name])}])*$")
    for name in _WORD_PATTERNS
}
# Respelled TTS text: word characters plus hyphen/apostrophe/space only.
_TTS_OK = {
    name: _compile(f"^(?:{_WORD_PATTERNS[name]}|[ '\\-])*$") for name in _WORD_PATTERNS
}


def is_word_char(ch: str, script: str = "latin") -> bool:
    return bool(_WORD_CHAR[script].match(ch))


def sentence_is_clean(text: str, script: str = "latin") -> bool:
    """True when every character of ``text`` belongs to the script class,
    its punctuation set, or whitespace (and none is a control character)."""
    if any(ch == "\t" or ch == "\n" or ord(ch) < 0x20 or ord(ch) == 0x7F for ch in text):
        return False
    return bool(_SENTENCE_OK[script].match(text))


def tts_text_is_clean(text: str, script: str = "latin") -> bool:
    """True when ``text`` contains only script word characters plus
    hyphen, apostrophe, and space."""
    return bool(_TTS_OK[script].match(text))
