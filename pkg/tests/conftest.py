import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpusforge.corpus import Corpus, Sentence


def make_sentence(sid, text, lang="en"):
    return Sentence.from_text(str(sid), text, lang=lang)


def make_corpus(texts, lang="en"):
    return Corpus(tuple(make_sentence(i, t, lang) for i, t in enumerate(texts)))


@pytest.fixture
def tiny_corpus():
    return make_corpus(["contact tower on final", "wilco say again", "tower copies all"])
