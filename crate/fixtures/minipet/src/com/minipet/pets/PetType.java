package com.minipet.pets;

public enum PetType {
    CAT, DOG, BIRD;

    public String label() {
        return name().toLowerCase();
    }
}
