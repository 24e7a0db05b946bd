"""Soundex and double metaphone encoders.

Both encoders work on ASCII letters only: input is uppercased and every
other character is dropped (double metaphone keeps single spaces, which its
"SAN " rule inspects).  Degenerate input encodes to the empty string.
"""

from __future__ import annotations

_SOUNDEX_DIGITS = {
    "B": "1", "F": "1", "P": "1", "V": "1",
    "C": "2", "G": "2", "J": "2", "K": "2", "Q": "2", "S": "2", "X": "2", "Z": "2",
    "D": "3", "T": "3",
    "L": "4",
    "M": "5", "N": "5",
    "R": "6",
}

_VOWELS = frozenset("AEIOUY")


def _clean(value: str, keep_space: bool = False) -> str:
    out = []
    for ch in value.upper():
        if "A" <= ch <= "Z":
            out.append(ch)
        elif keep_space and ch == " " and out and out[-1] != " ":
            out.append(ch)
    return "".join(out).strip()


def soundex(value: str) -> str:
    """American Soundex: one letter plus three digits, zero padded.

    Adjacent letters with the same digit collapse; H and W are transparent
    for that collapse while vowels reset it.  Input without letters encodes
    to the empty string.
    """
    letters = _clean(value)
    if not letters:
        return ""
    head = letters[0]
    code = [head]
    prev = _SOUNDEX_DIGITS.get(head)
    for ch in letters[1:]:
        if ch in ("H", "W"):
            continue
        digit = _SOUNDEX_DIGITS.get(ch)
        if digit is None:
            prev = None
            continue
        if digit != prev:
            code.append(digit)
            if len(code) == 4:
                break
        prev = digit
    return "".join(code).ljust(4, "0")


class _Metaphone:
    """Working state for one double metaphone encoding."""

    def __init__(self, word: str):
        self.word = word
        self.length = len(word)
        self.last = self.length - 1
        # padding lets positional rules look past the end of the word
        self.padded = word + "     "
        self.primary: list[str] = []
        self.secondary: list[str] = []

    def at(self, pos: int) -> str:
        if pos < 0:
            return " "
        return self.padded[pos]

    def string_at(self, start: int, length: int, *candidates: str) -> bool:
        if start < 0:
            return False
        return self.padded[start:start + length] in candidates

    def is_vowel(self, pos: int) -> bool:
        return self.at(pos) in _VOWELS

    def add(self, prim: str, sec: str | None = None) -> None:
        self.primary.append(prim)
        self.secondary.append(prim if sec is None else sec)

    def slavo_germanic(self) -> bool:
        w = self.word
        return "W" in w or "K" in w or "CZ" in w or "WITZ" in w


def double_metaphone(value: str) -> tuple[str, str]:
    """Double metaphone primary and alternate codes, not length capped.

    The alternate equals the primary when no rule diverges.  Implements the
    published transformation rules, including the Germanic, Slavic and
    Spanish context checks.
    """
    word = _clean(value, keep_space=True)
    if not word:
        return ("", "")
    m = _Metaphone(word)
    length, last = m.length, m.last
    current = 0

    if m.string_at(0, 2, "GN", "KN", "PN", "WR", "PS"):
        current = 1
    if m.at(0) == "X":
        m.add("S")
        current = 1

    while current < length:
        ch = m.at(current)

        if ch in _VOWELS:
            if current == 0:
                m.add("A")
            current += 1

        elif ch == " ":
            current += 1

        elif ch == "B":
            m.add("P")
            current += 2 if m.at(current + 1) == "B" else 1

        elif ch == "C":
            if (current > 1 and not m.is_vowel(current - 2)
                    and m.string_at(current - 1, 3, "ACH")
                    and m.at(current + 2) != "I"
                    and (m.at(current + 2) != "E"
                         or m.string_at(current - 2, 6, "BACHER", "MACHER"))):
                m.add("K")
                current += 2
            elif current == 0 and m.string_at(current, 6, "CAESAR"):
                m.add("S")
                current += 2
            elif m.string_at(current, 4, "CHIA"):
                m.add("K")
                current += 2
            elif m.string_at(current, 2, "CH"):
                if current > 0 and m.string_at(current, 4, "CHAE"):
                    m.add("K", "X")
                elif (current == 0
                      and (m.string_at(current + 1, 5, "HARAC", "HARIS")
                           or m.string_at(current + 1, 3, "HOR", "HYM", "HIA", "HEM"))
                      and not m.string_at(0, 5, "CHORE")):
                    m.add("K")
                elif (m.string_at(0, 4, "VAN ", "VON ") or m.string_at(0, 3, "SCH")
                      or m.string_at(current - 2, 6, "ORCHES", "ARCHIT", "ORCHID")
                      or m.string_at(current + 2, 1, "T", "S")
                      or ((m.string_at(current - 1, 1, "A", "O", "U", "E") or current == 0)
                          and (m.string_at(current + 2, 1, "L", "R", "N", "M",
                                           "B", "H", "F", "V", "W", " ")
                               or current + 1 == last))):
                    m.add("K")
                elif current > 0:
                    if m.string_at(0, 2, "MC"):
                        m.add("K")
                    else:
                        m.add("X", "K")
                else:
                    m.add("X")
                current += 2
            elif m.string_at(current, 2, "CZ") and not m.string_at(current - 2, 4, "WICZ"):
                m.add("S", "X")
                current += 2
            elif m.string_at(current + 1, 3, "CIA"):
                m.add("X")
                current += 3
            elif m.string_at(current, 2, "CC") and not (current == 1 and m.at(0) == "M"):
                if (m.string_at(current + 2, 1, "I", "E", "H")
                        and not m.string_at(current + 2, 2, "HU")):
                    if ((current == 1 and m.at(current - 1) == "A")
                            or m.string_at(current - 1, 5, "UCCEE", "UCCES")):
                        m.add("KS")
                    else:
                        m.add("X")
                    current += 3
                else:
                    m.add("K")
                    current += 2
            elif m.string_at(current, 2, "CK", "CG", "CQ"):
                m.add("K")
                current += 2
            elif m.string_at(current, 2, "CI", "CE", "CY"):
                if m.string_at(current, 3, "CIO", "CIE", "CIA"):
                    m.add("S", "X")
                else:
                    m.add("S")
                current += 2
            else:
                m.add("K")
                if m.string_at(current + 1, 2, " C", " Q", " G"):
                    current += 3
                elif (m.string_at(current + 1, 1, "C", "K", "Q")
                      and not m.string_at(current + 1, 2, "CE", "CI")):
                    current += 2
                else:
                    current += 1

        elif ch == "D":
            if m.string_at(current, 2, "DG"):
                if m.string_at(current + 2, 1, "I", "E", "Y"):
                    m.add("J")
                    current += 3
                else:
                    m.add("TK")
                    current += 2
            elif m.string_at(current, 2, "DT", "DD"):
                m.add("T")
                current += 2
            else:
                m.add("T")
                current += 1

        elif ch == "F":
            m.add("F")
            current += 2 if m.at(current + 1) == "F" else 1

        elif ch == "G":
            if m.at(current + 1) == "H":
                if current > 0 and not m.is_vowel(current - 1):
                    m.add("K")
                    current += 2
                elif current == 0:
                    if m.at(current + 2) == "I":
                        m.add("J")
                    else:
                        m.add("K")
                    current += 2
                elif ((current > 1 and m.string_at(current - 2, 1, "B", "H", "D"))
                      or (current > 2 and m.string_at(current - 3, 1, "B", "H", "D"))
                      or (current > 3 and m.string_at(current - 4, 1, "B", "H"))):
                    current += 2
                else:
                    if (current > 2 and m.at(current - 1) == "U"
                            and m.string_at(current - 3, 1, "C", "G", "L", "R", "T")):
                        m.add("F")
                    elif current > 0 and m.at(current - 1) != "I":
                        m.add("K")
                    current += 2
            elif m.at(current + 1) == "N":
                if current == 1 and m.is_vowel(0) and not m.slavo_germanic():
                    m.add("KN", "N")
                elif (not m.string_at(current + 2, 2, "EY")
                      and m.at(current + 1) != "Y" and not m.slavo_germanic()):
                    m.add("N", "KN")
                else:
                    m.add("KN")
                current += 2
            elif m.string_at(current + 1, 2, "LI") and not m.slavo_germanic():
                m.add("KL", "L")
                current += 2
            elif current == 0 and (m.at(current + 1) == "Y"
                                   or m.string_at(current + 1, 2, "ES", "EP", "EB", "EL",
                                                  "EY", "IB", "IL", "IN", "IE", "EI", "ER")):
                m.add("K", "J")
                current += 2
            elif ((m.string_at(current + 1, 2, "ER") or m.at(current + 1) == "Y")
                  and not m.string_at(0, 6, "DANGER", "RANGER", "MANGER")
                  and not m.string_at(current - 1, 1, "E", "I")
                  and not m.string_at(current - 1, 3, "RGY", "OGY")):
                m.add("K", "J")
                current += 2
            elif (m.string_at(current + 1, 1, "E", "I", "Y")
                  or m.string_at(current - 1, 4, "AGGI", "OGGI")):
                if (m.string_at(0, 4, "VAN ", "VON ") or m.string_at(0, 3, "SCH")
                        or m.string_at(current + 1, 2, "ET")):
                    m.add("K")
                elif m.string_at(current + 1, 4, "IER "):
                    m.add("J")
                else:
                    m.add("J", "K")
                current += 2
            else:
                m.add("K")
                current += 2 if m.at(current + 1) == "G" else 1

        elif ch == "H":
            if (current == 0 or m.is_vowel(current - 1)) and m.is_vowel(current + 1):
                m.add("H")
                current += 2
            else:
                current += 1

        elif ch == "J":
            if m.string_at(current, 4, "JOSE") or m.string_at(0, 4, "SAN "):
                if ((current == 0 and m.at(current + 4) == " ")
                        or m.string_at(0, 4, "SAN ")):
                    m.add("H")
                else:
                    m.add("J", "H")
                current += 1
            else:
                if current == 0:
                    m.add("J", "A")
                elif (m.is_vowel(current - 1) and not m.slavo_germanic()
                      and m.at(current + 1) in ("A", "O")):
                    m.add("J", "H")
                elif current == last:
                    m.add("J", "")
                elif (not m.string_at(current + 1, 1, "L", "T", "K", "S", "N", "M", "B", "Z")
                      and not m.string_at(current - 1, 1, "S", "K", "L")):
                    m.add("J")
                current += 2 if m.at(current + 1) == "J" else 1

        elif ch == "K":
            m.add("K")
            current += 2 if m.at(current + 1) == "K" else 1

        elif ch == "L":
            if m.at(current + 1) == "L":
                if ((current == length - 3
                     and m.string_at(current - 1, 4, "ILLO", "ILLA", "ALLE"))
                        or ((m.string_at(last - 1, 2, "AS", "OS")
                             or m.string_at(last, 1, "A", "O"))
                            and m.string_at(current - 1, 4, "ALLE"))):
                    m.add("L", "")
                else:
                    m.add("L")
                current += 2
            else:
                m.add("L")
                current += 1

        elif ch == "M":
            if ((m.string_at(current - 1, 3, "UMB")
                 and (current + 1 == last or m.string_at(current + 2, 2, "ER")))
                    or m.at(current + 1) == "M"):
                current += 2
            else:
                current += 1
            m.add("M")

        elif ch == "N":
            m.add("N")
            current += 2 if m.at(current + 1) == "N" else 1

        elif ch == "P":
            if m.at(current + 1) == "H":
                m.add("F")
                current += 2
            else:
                m.add("P")
                current += 2 if m.at(current + 1) in ("P", "B") else 1

        elif ch == "Q":
            m.add("K")
            current += 2 if m.at(current + 1) == "Q" else 1

        elif ch == "R":
            if (current == last and not m.slavo_germanic()
                    and m.string_at(current - 2, 2, "IE")
                    and not m.string_at(current - 4, 2, "ME", "MA")):
                m.add("", "R")
            else:
                m.add("R")
            current += 2 if m.at(current + 1) == "R" else 1

        elif ch == "S":
            if m.string_at(current - 1, 3, "ISL", "YSL"):
                current += 1
            elif current == 0 and m.string_at(current, 5, "SUGAR"):
                m.add("X", "S")
                current += 1
            elif m.string_at(current, 2, "SH"):
                if m.string_at(current + 1, 4, "HEIM", "HOEK", "HOLM", "HOLZ"):
                    m.add("S")
                else:
                    m.add("X")
                current += 2
            elif (m.string_at(current, 3, "SIO", "SIA")
                  or m.string_at(current, 4, "SIAN")):
                if not m.slavo_germanic():
                    m.add("S", "X")
                else:
                    m.add("S")
                current += 3
            elif ((current == 0 and m.string_at(current + 1, 1, "M", "N", "L", "W"))
                  or m.string_at(current + 1, 1, "Z")):
                m.add("S", "X")
                current += 2 if m.at(current + 1) == "Z" else 1
            elif m.string_at(current, 2, "SC"):
                if m.at(current + 2) == "H":
                    if m.string_at(current + 3, 2, "OO", "ER", "EN", "UY", "ED", "EM"):
                        if m.string_at(current + 3, 2, "ER", "EN"):
                            m.add("X", "SK")
                        else:
                            m.add("SK")
                    elif current == 0 and not m.is_vowel(3) and m.at(3) != "W":
                        m.add("X", "S")
                    else:
                        m.add("X")
                    current += 3
                elif m.string_at(current + 2, 1, "I", "E", "Y"):
                    m.add("S")
                    current += 3
                else:
                    m.add("SK")
                    current += 3
            else:
                if current == last and m.string_at(current - 2, 2, "AI", "OI"):
                    m.add("", "S")
                else:
                    m.add("S")
                current += 2 if m.at(current + 1) in ("S", "Z") else 1

        elif ch == "T":
            if m.string_at(current, 4, "TION"):
                m.add("X")
                current += 3
            elif m.string_at(current, 3, "TIA", "TCH"):
                m.add("X")
                current += 3
            elif m.string_at(current, 2, "TH") or m.string_at(current, 3, "TTH"):
                if (m.string_at(current + 2, 2, "OM", "AM")
                        or m.string_at(0, 4, "VAN ", "VON ")
                        or m.string_at(0, 3, "SCH")):
                    m.add("T")
                else:
                    m.add("0", "T")
                current += 2
            else:
                m.add("T")
                current += 2 if m.at(current + 1) in ("T", "D") else 1

        elif ch == "V":
            m.add("F")
            current += 2 if m.at(current + 1) == "V" else 1

        elif ch == "W":
            if m.string_at(current, 2, "WR"):
                m.add("R")
                current += 2
            elif current == 0 and (m.is_vowel(current + 1)
                                   or m.string_at(current, 2, "WH")):
                if m.is_vowel(current + 1):
                    m.add("A", "F")
                else:
                    m.add("A")
                current += 1
            elif ((current == last and m.is_vowel(current - 1))
                  or m.string_at(current - 1, 5, "EWSKI", "EWSKY", "OWSKI", "OWSKY")
                  or m.string_at(0, 3, "SCH")):
                m.add("", "F")
                current += 1
            elif m.string_at(current, 4, "WICZ", "WITZ"):
                m.add("TS", "FX")
                current += 4
            else:
                current += 1

        elif ch == "X":
            if not (current == last
                    and (m.string_at(current - 3, 3, "IAU", "EAU")
                         or m.string_at(current - 2, 2, "AU", "OU"))):
                m.add("KS")
            current += 2 if m.at(current + 1) in ("C", "X") else 1

        elif ch == "Z":
            if m.at(current + 1) == "H":
                m.add("J")
                current += 2
            else:
                if (m.string_at(current + 1, 2, "ZO", "ZI", "ZA")
                        or (m.slavo_germanic() and current > 0 and m.at(current - 1) != "T")):
                    m.add("S", "TS")
                else:
                    m.add("S")
                current += 2 if m.at(current + 1) == "Z" else 1

        else:
            current += 1

    return "".join(m.primary), "".join(m.secondary)
