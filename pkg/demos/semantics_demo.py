"""Language identification and concept grounding on a few short texts.

Uses the WordNet subset and language profiles shipped with the package.

    python3 demos/semantics_demo.py ["some text" ...]
"""

import sys

from hashtag_dynamics.lexicon.semantics import default_profiles, default_taxonomy, Grounder
from hashtag_dynamics.lexicon.textcat import identify_language
from hashtag_dynamics.lexicon.wordnet import rollup_depth4

SAMPLES = [
    "Huge earthquake felt across the city this morning, buildings shaking #quake",
    "RT @news: the election results are coming in tonight, polls closed",
    "Der Hund läuft schnell über die Straße und bellt laut",
    "watching the new phone launch live, the camera looks amazing",
]


def main():
    texts = sys.argv[1:] or SAMPLES
    taxonomy = default_taxonomy()
    profiles = default_profiles()
    grounder = Grounder(taxonomy, profiles)
    print(f"{len(profiles)} language profiles, {len(taxonomy.synsets)} synsets\n")
    for text in texts:
        ranking = identify_language(text, profiles)
        keys = grounder.ground(text)
        concepts = sorted({c for k in keys for c in rollup_depth4(k, taxonomy)})
        print(text)
        print("  languages:", ", ".join(lang for lang, _ in ranking[:3]))
        print("  synsets:  ", ", ".join(taxonomy.name(k) for k in keys) or "-")
        print("  concepts: ", ", ".join(taxonomy.name(c) for c in concepts) or "-")
        print()


if __name__ == "__main__":
    main()
