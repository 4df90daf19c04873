#!/usr/bin/env python3
"""
Script de build pour pyqkt
Nettoyage, installation en mode développement, tests puis distributions
"""
import platform
import shutil
import subprocess
import sys
from pathlib import Path


def run_command(cmd, cwd=None):
    """Exécute une commande shell et retourne son statut"""
    print(f"Exécution de: {' '.join(cmd)}")
    result = subprocess.run(cmd, cwd=cwd)
    return result.returncode == 0


def clean():
    """Nettoie les fichiers de build précédents"""
    print("=== Nettoyage des fichiers de build ===")
    for pattern in ("build", "dist", "*.egg-info", "results"):
        for path in Path(".").glob(pattern):
            try:
                if path.is_dir():
                    shutil.rmtree(path)
                else:
                    path.unlink()
                print(f"Supprimé: {path}")
            except OSError as e:
                print(f"Avertissement: Impossible de supprimer {path}: {e}")


def uninstall():
    """Désinstalle le package existant (ignore les erreurs)"""
    print("=== Désinstallation du package existant ===")
    if not run_command([sys.executable, "-m", "pip", "uninstall", "-y", "pyqkt"]):
        print("⚠️ Désinstallation échouée, mais on continue...")
    return True


def install_dev():
    """Installe le package en mode développement avec les dépendances de test"""
    print("=== Installation en mode développement ===")
    if run_command([sys.executable, "-m", "pip", "install", "-e", ".[test]", "--user"]):
        return True
    return run_command([sys.executable, "-m", "pip", "install", "-e", ".[test]"])


def test_import():
    """Teste l'import du package et le point d'entrée CLI"""
    print("=== Test d'import ===")
    try:
        import pyqkt
        from pyqkt.cli import build_parser

        pyqkt.console.success("✅ Import pyqkt réussi !")
        print(f"✅ Version: {pyqkt.__version__}")
        print(f"✅ Sous-commandes: {build_parser().prog} build | fidelity | edge-scan | ...")
        return True
    except Exception as e:
        print(f"❌ Erreur d'import: {e}")
        return False


def run_tests(slow=False):
    """Exécute les tests (les reproductions complètes avec --slow)"""
    print("=== Exécution des tests ===")
    cmd = [sys.executable, "-m", "pytest"]
    if slow:
        cmd += ["-m", "slow"]
    return run_command(cmd)


def create_distributions():
    """Crée sdist et wheel"""
    print("=== Création des distributions ===")
    return run_command([sys.executable, "-m", "build"])


def main():
    print("🚀 pyqkt - Build Script")
    print(f"Plateforme: {platform.system()}")
    print(f"Python: {sys.version}")

    clean()
    uninstall()

    if not install_dev():
        print("❌ Erreur lors de l'installation")
        return 1

    if not test_import():
        print("❌ Erreur lors du test d'import")
        return 1

    if not run_tests(slow="--slow" in sys.argv):
        print("❌ Erreur lors des tests")
        return 1

    if "--dist" in sys.argv:
        if not create_distributions():
            print("❌ Erreur lors de la création des distributions")
            return 1
        print("📦 Fichiers créés dans dist/:")
        for file in Path("dist").glob("*"):
            print(f"   - {file.name}")

    print("\n🎉 BUILD RÉUSSI !")
    return 0


if __name__ == "__main__":
    sys.exit(main())
