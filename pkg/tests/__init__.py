"""Tests for the dasc package"""
