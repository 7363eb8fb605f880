"""Regenerates corpus_1000.jsonl. Needs RDKit; not part of the build.

Curated drug-like molecules first, then seeded random growth from ring and
chain fragments until 1,000 unique single-fragment molecules with at most
30 heavy atoms and 0-3 rings exist. Halogens keep valence 1. Reference
facts come from RDKit.
"""

import json
import random
import sys

from rdkit import Chem, RDLogger
from rdkit.Chem import rdMolDescriptors

RDLogger.DisableLog("rdApp.*")

CURATED = [
    ("aspirin", "CC(=O)Oc1ccccc1C(=O)O"),
    ("caffeine", "Cn1cnc2c1c(=O)n(C)c(=O)n2C"),
    ("ibuprofen", "CC(C)Cc1ccc(cc1)C(C)C(=O)O"),
    ("paracetamol", "CC(=O)Nc1ccc(O)cc1"),
    ("nicotine", "CN1CCCC1c1cccnc1"),
    ("theobromine", "Cn1cnc2c1c(=O)[nH]c(=O)n2C"),
    ("indole", "c1ccc2[nH]ccc2c1"),
    ("quinoline", "c1ccc2ncccc2c1"),
    ("naphthalene", "c1ccc2ccccc2c1"),
    ("pyrrole", "c1cc[nH]c1"),
    ("imidazole", "c1c[nH]cn1"),
    ("furan", "c1ccoc1"),
    ("thiophene", "c1ccsc1"),
    ("pyridine", "c1ccncc1"),
    ("benzoic-acid", "OC(=O)c1ccccc1"),
    ("acetic-acid", "CC(=O)O"),
    ("ethanol", "CCO"),
    ("glycine", "NCC(=O)O"),
    ("alanine", "CC(N)C(=O)O"),
    ("serine", "NC(CO)C(=O)O"),
    ("cysteine", "NC(CS)C(=O)O"),
    ("phenylalanine", "NC(Cc1ccccc1)C(=O)O"),
    ("tryptophan", "NC(Cc1c[nH]c2ccccc12)C(=O)O"),
    ("histidine", "NC(Cc1c[nH]cn1)C(=O)O"),
    ("lidocaine", "CCN(CC)CC(=O)Nc1c(C)cccc1C"),
    ("procaine", "CCN(CC)CCOC(=O)c1ccc(N)cc1"),
    ("benzocaine", "CCOC(=O)c1ccc(N)cc1"),
    ("salicylic-acid", "OC(=O)c1ccccc1O"),
    ("vanillin", "COc1cc(C=O)ccc1O"),
    ("menthol", "CC(C)C1CCC(C)CC1O"),
    ("camphor", "CC1(C)C2CCC1(C)C(=O)C2"),
    ("adamantane", "C1C2CC3CC1CC(C2)C3"),
    ("cyclohexanone", "O=C1CCCCC1"),
    ("morpholine", "C1COCCN1"),
    ("piperazine", "C1CNCCN1"),
    ("sulfanilamide", "Nc1ccc(cc1)S(N)(=O)=O"),
    ("metformin", "CN(C)C(=N)NC(=N)N"),
    ("phenobarbital", "CCC1(c2ccccc2)C(=O)NC(=O)NC1=O"),
    ("diazepam", "CN1C(=O)CN=C(c2ccccc2)c2cc(Cl)ccc21"),
    ("fluoxetine", "CNCCC(Oc1ccc(cc1)C(F)(F)F)c1ccccc1"),
    ("chlorpromazine-core", "CN(C)CCCN1c2ccccc2Sc2ccc(Cl)cc21"),
    ("tetrazole", "c1nn[nH]n1"),
    ("triazine", "c1ncncn1"),
    ("pyrimidine", "c1cncnc1"),
    ("uracil", "O=c1cc[nH]c(=O)[nH]1"),
    ("thymine", "Cc1c[nH]c(=O)[nH]c1=O"),
    ("cytosine", "Nc1cc[nH]c(=O)n1"),
    ("adenine", "Nc1ncnc2[nH]cnc12"),
    ("guanine", "Nc1nc2[nH]cnc2c(=O)[nH]1"),
    ("benzimidazole", "c1ccc2[nH]cnc2c1"),
    ("benzofuran", "c1ccc2occc2c1"),
    ("benzothiophene", "c1ccc2sccc2c1"),
    ("oxazole", "c1cocn1"),
    ("thiazole", "c1cscn1"),
    ("pyrazole", "c1cc[nH]n1"),
    ("isoxazole", "c1cnoc1"),
    ("coumarin", "O=c1ccc2ccccc2o1"),
    ("quinazoline", "c1ccc2ncncc2c1"),
    ("acridine-like", "c1ccc2nc3ccccc3cc2c1"),
    ("azulene", "c1ccc2cccc2cc1"),
    ("tropolone", "O=c1cccccc1O"),
    ("pyridinium", "C[n+]1ccccc1"),
    ("tetramethylammonium", "C[N+](C)(C)C"),
    ("acetate", "CC(=O)[O-]"),
    ("nitrobenzene", "O=[N+]([O-])c1ccccc1"),
    ("betaine", "C[N+](C)(C)CC(=O)[O-]"),
    ("cyclopentadienide", "[cH-]1cccc1"),
    ("imidazolium", "Cn1cc[n+](C)c1"),
    ("dmso", "CS(C)=O"),
    ("sulfolane", "O=S1(=O)CCCC1"),
    ("trimethyl-phosphate", "COP(=O)(OC)OC"),
    ("phenylboronic-acid", "OB(O)c1ccccc1"),
    ("tetramethylsilane", "C[Si](C)(C)C"),
    ("iodobenzene", "Ic1ccccc1"),
    ("bromochlorofluoromethane", "FC(Cl)Br"),
    ("halothane", "FC(F)(F)C(Cl)Br"),
    ("acetonitrile", "CC#N"),
    ("propyne", "CC#C"),
    ("allene", "C=C=C"),
    ("ketene", "C=C=O"),
    ("urea", "NC(N)=O"),
    ("guanidine", "NC(N)=N"),
    ("hydroxylamine", "NO"),
    ("hydrazine", "NN"),
    ("azobenzene", "c1ccc(cc1)N=Nc1ccccc1"),
    ("diphenyl-ether", "c1ccc(cc1)Oc1ccccc1"),
    ("biphenyl", "c1ccc(cc1)-c1ccccc1"),
    ("stilbene", "c1ccc(cc1)C=Cc1ccccc1"),
    ("spiro-nonane", "C1CCC2(C1)CCCC2"),
    ("spiro-undecane", "C1CCC2(CC1)CCCCC2"),
    ("norbornane", "C1CC2CCC1C2"),
    ("decalin", "C1CCC2CCCCC2C1"),
    ("indane", "c1ccc2CCCc2c1"),
    ("tetralin", "c1ccc2CCCCc2c1"),
    ("cubane-fragment", "C1CC2CC1C2"),
    ("cyclopropane", "C1CC1"),
    ("oxirane", "C1CO1"),
    ("aziridine", "C1CN1"),
    ("thiirane", "C1CS1"),
    ("cyclobutene", "C1=CCC1"),
    ("cyclooctatetraene", "C1=CC=CC=CC=C1"),
    ("bromofluorochlorobenzene", "Fc1ccc(Cl)c(Br)c1"),
    ("dichlorobenzene", "Clc1ccccc1Cl"),
    ("dibromopropane", "BrCCCBr"),
    ("chlorofluoroethane", "FCCCl"),
    ("fluorobromo-cyclohexane", "FC1CCC(Br)CC1"),
    ("chloro-bromo-naphthalene", "Clc1ccc2cc(Br)ccc2c1"),
    ("dihalo-ether", "FCCOCCCl"),
    ("bromo-iodo", "BrCCCCI"),
]

ELEMENTS = ["C"] * 14 + ["N"] * 3 + ["O"] * 3 + ["S", "F", "Cl", "Br", "I", "P", "Si", "B"]
RINGS = ["c1ccccc1", "C1CCCCC1", "c1ccncc1", "c1cc[nH]c1", "c1ccoc1", "c1ccsc1",
         "C1CCNCC1", "C1CCOC1", "C1CC1", "C1CCC1", "C1CCCC1", "c1cncnc1", "c1cn[nH]c1",
         "C1CCCCCC1", "c1ccc2ccccc2c1", "c1ccc2[nH]ccc2c1", "C1CC2CCC1C2", "C1CCC2(C1)CC2",
         "O=C1CCCC1", "C1=CCCC=C1"]


def ring_count(m):
    return len(Chem.GetSSSR(m))


def plain_halogens(m):
    return all(a.GetTotalValence() == 1 for a in m.GetAtoms() if a.GetSymbol() in ("F", "Cl", "Br", "I"))


def grow(rng):
    target = rng.randint(4, 30)
    if rng.random() < 0.3:
        m = Chem.RWMol(Chem.MolFromSmiles(rng.choice(RINGS)))
    else:
        m = Chem.RWMol(Chem.MolFromSmiles(rng.choice(["C", "CC", "CO", "CN", "C=O"])))
    for _ in range(80):
        if m.GetNumAtoms() >= target:
            break
        trial = Chem.RWMol(m)
        anchor = rng.randrange(trial.GetNumAtoms())
        roll = rng.random()
        if roll < 0.15 and ring_count(trial) < 3:
            frag = Chem.MolFromSmiles(rng.choice(RINGS))
            offset = trial.GetNumAtoms()
            combo = Chem.RWMol(Chem.CombineMols(trial, frag))
            combo.AddBond(anchor, offset + rng.randrange(frag.GetNumAtoms()), Chem.BondType.SINGLE)
            trial = combo
        elif roll < 0.22 and trial.GetNumAtoms() > 4:
            a, b = rng.sample(range(trial.GetNumAtoms()), 2)
            if trial.GetBondBetweenAtoms(a, b) is None:
                trial.AddBond(a, b, Chem.BondType.SINGLE)
        else:
            idx = trial.AddAtom(Chem.Atom(rng.choice(ELEMENTS)))
            order = rng.choices([Chem.BondType.SINGLE, Chem.BondType.DOUBLE, Chem.BondType.TRIPLE], [10, 2, 0.4])[0]
            trial.AddBond(anchor, idx, order)
        for atom in trial.GetAtoms():
            atom.SetNoImplicit(False)
            atom.SetNumExplicitHs(0) if not atom.GetIsAromatic() else None
        try:
            Chem.SanitizeMol(trial)
        except Exception:
            continue
        if ring_count(trial) > 3:
            continue
        paths = Chem.GetSymmSSSR(trial)
        if any(len(r) > 8 for r in paths):
            continue
        m = trial
    if rng.random() < 0.06:
        cands = [a.GetIdx() for a in m.GetAtoms()
                 if a.GetSymbol() == "N" and a.GetTotalNumHs() > 0 and not a.GetIsAromatic()]
        if cands:
            a = m.GetAtomWithIdx(rng.choice(cands))
            a.SetFormalCharge(1)
            try:
                Chem.SanitizeMol(m)
            except Exception:
                return None
    return m.GetMol()


def facts(mol):
    return {
        "heavy_atoms": mol.GetNumHeavyAtoms(),
        "rings": ring_count(mol),
        "formula": rdMolDescriptors.CalcMolFormula(mol),
    }


def main(path, seed=20251015, total=1000):
    rng = random.Random(seed)
    seen = set()
    rows = []
    for name, smi in CURATED:
        mol = Chem.MolFromSmiles(smi)
        can = Chem.MolToSmiles(mol, isomericSmiles=False)
        if can in seen or ring_count(mol) > 3:
            continue
        seen.add(can)
        rows.append({"id": f"cur-{name}", "smiles": can, **facts(mol)})
    n = 0
    while len(rows) < total:
        mol = grow(rng)
        if mol is None:
            continue
        if mol.GetNumHeavyAtoms() > 30 or ring_count(mol) > 3:
            continue
        if len(Chem.GetMolFrags(mol)) != 1:
            continue
        can = Chem.MolToSmiles(mol, isomericSmiles=False)
        if can in seen or "@" in can or "/" in can or "\\" in can:
            continue
        check = Chem.MolFromSmiles(can)
        if check is None or any(a.GetNumRadicalElectrons() for a in check.GetAtoms()) or not plain_halogens(check):
            continue
        seen.add(can)
        n += 1
        rows.append({"id": f"gen-{n:04d}", "smiles": can, **facts(check)})
    with open(path, "w") as f:
        for r in rows:
            f.write(json.dumps(r) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "corpus_1000.jsonl")
