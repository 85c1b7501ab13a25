"""RCCS Workbench Package"""
